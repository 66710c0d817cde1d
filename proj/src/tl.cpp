#include "vidtl/tl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace vidtl {

// ---------------------------------------------------------------------------
// PropositionSet

std::string PropositionSet::normalize(std::string_view text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
    }
    return out;
}

PropositionSet::PropositionSet(std::vector<std::string> texts) {
    if (texts.size() > 64) {
        throw Error(Errc::too_many_propositions,
                    "at most 64 propositions are supported, got " + std::to_string(texts.size()));
    }
    std::set<std::string> seen;
    props_.reserve(texts.size());
    for (auto& raw : texts) {
        std::string norm = normalize(raw);
        if (norm.empty()) {
            throw Error(Errc::invalid_argument, "proposition text must be non-empty");
        }
        if (!seen.insert(norm).second) {
            throw Error(Errc::invalid_argument, "duplicate proposition: \"" + norm + "\"");
        }
        // Keep the trimmed original casing for display.
        std::size_t b = raw.find_first_not_of(" \t\r\n");
        std::size_t e = raw.find_last_not_of(" \t\r\n");
        props_.push_back(Proposition{props_.size(), raw.substr(b, e - b + 1)});
    }
}

const Proposition& PropositionSet::at(std::size_t i) const {
    if (i >= props_.size()) {
        throw Error(Errc::index_out_of_range,
                    "proposition index " + std::to_string(i) + " out of range (size " +
                        std::to_string(props_.size()) + ")");
    }
    return props_[i];
}

std::optional<std::size_t> PropositionSet::find(std::string_view text) const {
    const std::string norm = normalize(text);
    for (const auto& p : props_) {
        if (normalize(p.text) == norm) return p.index;
    }
    return std::nullopt;
}

std::vector<std::string> PropositionSet::texts() const {
    std::vector<std::string> out;
    out.reserve(props_.size());
    for (const auto& p : props_) out.push_back(p.text);
    return out;
}

bool PropositionSet::operator==(const PropositionSet& other) const {
    if (props_.size() != other.props_.size()) return false;
    for (std::size_t i = 0; i < props_.size(); ++i) {
        if (normalize(props_[i].text) != normalize(other.props_[i].text)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Formula

struct Formula::Node {
    FormulaKind kind;
    std::size_t prop_index = 0;
    std::optional<Formula> lhs;
    std::optional<Formula> rhs;
};

Formula Formula::atom(std::size_t prop_index) {
    auto node = std::make_shared<Node>();
    node->kind = FormulaKind::atom;
    node->prop_index = prop_index;
    return Formula(std::move(node));
}

Formula Formula::negation(Formula f) {
    auto node = std::make_shared<Node>();
    node->kind = FormulaKind::negation;
    node->lhs = std::move(f);
    return Formula(std::move(node));
}

Formula Formula::next(Formula f) {
    auto node = std::make_shared<Node>();
    node->kind = FormulaKind::next;
    node->lhs = std::move(f);
    return Formula(std::move(node));
}

Formula Formula::always(Formula f) {
    auto node = std::make_shared<Node>();
    node->kind = FormulaKind::always;
    node->lhs = std::move(f);
    return Formula(std::move(node));
}

Formula Formula::eventually(Formula f) {
    auto node = std::make_shared<Node>();
    node->kind = FormulaKind::eventually;
    node->lhs = std::move(f);
    return Formula(std::move(node));
}

Formula Formula::conjunction(Formula l, Formula r) {
    auto node = std::make_shared<Node>();
    node->kind = FormulaKind::conjunction;
    node->lhs = std::move(l);
    node->rhs = std::move(r);
    return Formula(std::move(node));
}

Formula Formula::disjunction(Formula l, Formula r) {
    auto node = std::make_shared<Node>();
    node->kind = FormulaKind::disjunction;
    node->lhs = std::move(l);
    node->rhs = std::move(r);
    return Formula(std::move(node));
}

Formula Formula::implication(Formula l, Formula r) {
    auto node = std::make_shared<Node>();
    node->kind = FormulaKind::implication;
    node->lhs = std::move(l);
    node->rhs = std::move(r);
    return Formula(std::move(node));
}

Formula Formula::until(Formula l, Formula r) {
    auto node = std::make_shared<Node>();
    node->kind = FormulaKind::until;
    node->lhs = std::move(l);
    node->rhs = std::move(r);
    return Formula(std::move(node));
}

Formula Formula::seq(Formula l, Formula r) {
    auto node = std::make_shared<Node>();
    node->kind = FormulaKind::seq;
    node->lhs = std::move(l);
    node->rhs = std::move(r);
    return Formula(std::move(node));
}

FormulaKind Formula::kind() const { return node_->kind; }

bool Formula::is_unary() const {
    switch (kind()) {
        case FormulaKind::negation:
        case FormulaKind::next:
        case FormulaKind::always:
        case FormulaKind::eventually:
            return true;
        default:
            return false;
    }
}

bool Formula::is_binary() const {
    switch (kind()) {
        case FormulaKind::conjunction:
        case FormulaKind::disjunction:
        case FormulaKind::implication:
        case FormulaKind::until:
        case FormulaKind::seq:
            return true;
        default:
            return false;
    }
}

std::size_t Formula::prop_index() const {
    if (kind() != FormulaKind::atom) {
        throw std::logic_error("prop_index() called on a non-atom formula node");
    }
    return node_->prop_index;
}

const Formula& Formula::child() const {
    if (!is_unary()) throw std::logic_error("child() called on a non-unary formula node");
    return *node_->lhs;
}

const Formula& Formula::left() const {
    if (!is_binary()) throw std::logic_error("left() called on a non-binary formula node");
    return *node_->lhs;
}

const Formula& Formula::right() const {
    if (!is_binary()) throw std::logic_error("right() called on a non-binary formula node");
    return *node_->rhs;
}

bool Formula::operator==(const Formula& other) const {
    if (node_ == other.node_) return true;
    if (kind() != other.kind()) return false;
    switch (kind()) {
        case FormulaKind::atom:
            return prop_index() == other.prop_index();
        case FormulaKind::negation:
        case FormulaKind::next:
        case FormulaKind::always:
        case FormulaKind::eventually:
            return child() == other.child();
        default:
            return left() == other.left() && right() == other.right();
    }
}

// ---------------------------------------------------------------------------
// Lexer / parser

namespace {

enum class Tok { lparen, rparen, and_, or_, not_, implies, g, f, x, u, text, end };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string text;  // atom payload
};

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::lparen: return "'('";
        case Tok::rparen: return "')'";
        case Tok::and_: return "'&'";
        case Tok::or_: return "'|'";
        case Tok::not_: return "'!'";
        case Tok::implies: return "'->'";
        case Tok::g: return "'G'";
        case Tok::f: return "'F'";
        case Tok::x: return "'X'";
        case Tok::u: return "'U'";
        case Tok::text: return "quoted proposition";
        case Tok::end: return "end of input";
    }
    return "?";
}

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t pos = i;
        switch (c) {
            case '(': out.push_back({Tok::lparen, pos, {}}); ++i; continue;
            case ')': out.push_back({Tok::rparen, pos, {}}); ++i; continue;
            case '&': out.push_back({Tok::and_, pos, {}}); ++i; continue;
            case '|': out.push_back({Tok::or_, pos, {}}); ++i; continue;
            case '!': out.push_back({Tok::not_, pos, {}}); ++i; continue;
            case '-':
                if (i + 1 < src.size() && src[i + 1] == '>') {
                    out.push_back({Tok::implies, pos, {}});
                    i += 2;
                    continue;
                }
                throw SyntaxError(pos, "'->'", "stray '-'");
            case '"': {
                std::string text;
                ++i;
                bool closed = false;
                while (i < src.size()) {
                    if (src[i] == '\\' && i + 1 < src.size() &&
                        (src[i + 1] == '"' || src[i + 1] == '\\')) {
                        text.push_back(src[i + 1]);
                        i += 2;
                    } else if (src[i] == '"') {
                        ++i;
                        closed = true;
                        break;
                    } else {
                        text.push_back(src[i]);
                        ++i;
                    }
                }
                if (!closed) throw SyntaxError(pos, "closing '\"'", "unterminated proposition");
                out.push_back({Tok::text, pos, std::move(text)});
                continue;
            }
            default:
                break;
        }
        // Single-letter operator keywords must stand alone.
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isalnum(static_cast<unsigned char>(src[j]))) ++j;
            const std::string_view word = src.substr(i, j - i);
            if (word == "G") { out.push_back({Tok::g, pos, {}}); i = j; continue; }
            if (word == "F") { out.push_back({Tok::f, pos, {}}); i = j; continue; }
            if (word == "X") { out.push_back({Tok::x, pos, {}}); i = j; continue; }
            if (word == "U") { out.push_back({Tok::u, pos, {}}); i = j; continue; }
            throw SyntaxError(pos, "operator or quoted proposition",
                              "unexpected word '" + std::string(word) + "'");
        }
        throw SyntaxError(pos, "operator or quoted proposition",
                          std::string("unexpected character '") + c + "'");
    }
    out.push_back({Tok::end, src.size(), {}});
    return out;
}

class Parser {
  public:
    Parser(std::vector<Token> tokens, const PropositionSet& props)
        : tokens_(std::move(tokens)), props_(props) {}

    Formula parse() {
        Formula f = parse_implication();
        expect(Tok::end);
        return f;
    }

  private:
    const Token& peek() const { return tokens_[at_]; }

    Token take() { return tokens_[at_++]; }

    bool accept(Tok kind) {
        if (peek().kind == kind) {
            ++at_;
            return true;
        }
        return false;
    }

    void expect(Tok kind) {
        if (!accept(kind)) {
            throw SyntaxError(peek().pos, tok_name(kind),
                              std::string("unexpected ") + tok_name(peek().kind));
        }
    }

    Formula parse_implication() {
        Formula lhs = parse_disjunction();
        if (accept(Tok::implies)) {
            Formula rhs = parse_implication();
            // a -> b becomes !a | b at parse time.
            return Formula::disjunction(Formula::negation(std::move(lhs)), std::move(rhs));
        }
        return lhs;
    }

    Formula parse_disjunction() {
        Formula lhs = parse_conjunction();
        while (accept(Tok::or_)) lhs = Formula::disjunction(std::move(lhs), parse_conjunction());
        return lhs;
    }

    Formula parse_conjunction() {
        Formula lhs = parse_sequence();
        while (accept(Tok::and_)) lhs = Formula::conjunction(std::move(lhs), parse_sequence());
        return lhs;
    }

    Formula parse_sequence() {
        Formula lhs = parse_until();
        if (accept(Tok::x)) return Formula::seq(std::move(lhs), parse_sequence());
        return lhs;
    }

    Formula parse_until() {
        Formula lhs = parse_unary();
        if (accept(Tok::u)) return Formula::until(std::move(lhs), parse_until());
        return lhs;
    }

    Formula parse_unary() {
        switch (peek().kind) {
            case Tok::not_: take(); return Formula::negation(parse_unary());
            case Tok::g: take(); return Formula::always(parse_unary());
            case Tok::f: take(); return Formula::eventually(parse_unary());
            case Tok::x: take(); return Formula::next(parse_unary());
            default: return parse_primary();
        }
    }

    Formula parse_primary() {
        if (accept(Tok::lparen)) {
            Formula f = parse_implication();
            expect(Tok::rparen);
            return f;
        }
        if (peek().kind == Tok::text) {
            Token tok = take();
            auto idx = props_.find(tok.text);
            if (!idx) {
                throw Error(Errc::unknown_proposition, "\"" + tok.text + "\"");
            }
            return Formula::atom(*idx);
        }
        throw SyntaxError(peek().pos, "'(' or quoted proposition",
                          std::string("unexpected ") + tok_name(peek().kind));
    }

    std::vector<Token> tokens_;
    const PropositionSet& props_;
    std::size_t at_ = 0;
};

}  // namespace

Formula parse_formula(std::string_view text, const PropositionSet& props) {
    return Parser(lex(text), props).parse();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

// Binding strength per kind; parenthesize children bound looser than the parent.
int print_level(FormulaKind k) {
    switch (k) {
        case FormulaKind::implication: return 0;
        case FormulaKind::disjunction: return 1;
        case FormulaKind::conjunction: return 2;
        case FormulaKind::seq: return 3;
        case FormulaKind::until: return 4;
        case FormulaKind::negation:
        case FormulaKind::next:
        case FormulaKind::always:
        case FormulaKind::eventually: return 5;
        case FormulaKind::atom: return 6;
    }
    return 6;
}

bool right_associative(FormulaKind k) {
    return k == FormulaKind::implication || k == FormulaKind::seq || k == FormulaKind::until;
}

void print_rec(std::string& out, const Formula& f, const PropositionSet& props) {
    const auto k = f.kind();
    const int level = print_level(k);
    auto child_str = [&](const Formula& c, bool tighter_required) {
        std::string s;
        const bool parens =
            print_level(c.kind()) < level + (tighter_required ? 1 : 0);
        if (parens) s.push_back('(');
        print_rec(s, c, props);
        if (parens) s.push_back(')');
        return s;
    };
    switch (k) {
        case FormulaKind::atom: {
            out.push_back('"');
            for (char c : props.at(f.prop_index()).text) {
                if (c == '"' || c == '\\') out.push_back('\\');
                out.push_back(c);
            }
            out.push_back('"');
            return;
        }
        case FormulaKind::negation: out += "! " + child_str(f.child(), false); return;
        case FormulaKind::next: out += "X " + child_str(f.child(), false); return;
        case FormulaKind::always: out += "G " + child_str(f.child(), false); return;
        case FormulaKind::eventually: out += "F " + child_str(f.child(), false); return;
        case FormulaKind::conjunction:
        case FormulaKind::disjunction:
        case FormulaKind::implication:
        case FormulaKind::until:
        case FormulaKind::seq: {
            const char* op = k == FormulaKind::conjunction   ? "&"
                             : k == FormulaKind::disjunction ? "|"
                             : k == FormulaKind::implication ? "->"
                             : k == FormulaKind::until       ? "U"
                                                             : "X";
            const bool rassoc = right_associative(k);
            out += child_str(f.left(), rassoc);
            out += " ";
            out += op;
            out += " ";
            out += child_str(f.right(), !rassoc);
            return;
        }
    }
}

}  // namespace

std::string to_string(const Formula& f, const PropositionSet& props) {
    std::string out;
    print_rec(out, f, props);
    return out;
}

// ---------------------------------------------------------------------------
// Desugaring and semantics

Formula desugar_seq(const Formula& f) {
    switch (f.kind()) {
        case FormulaKind::atom:
            return f;
        case FormulaKind::negation:
            return Formula::negation(desugar_seq(f.child()));
        case FormulaKind::next:
            return Formula::next(desugar_seq(f.child()));
        case FormulaKind::always:
            return Formula::always(desugar_seq(f.child()));
        case FormulaKind::eventually:
            return Formula::eventually(desugar_seq(f.child()));
        case FormulaKind::conjunction:
            return Formula::conjunction(desugar_seq(f.left()), desugar_seq(f.right()));
        case FormulaKind::disjunction:
            return Formula::disjunction(desugar_seq(f.left()), desugar_seq(f.right()));
        case FormulaKind::implication:
            return Formula::implication(desugar_seq(f.left()), desugar_seq(f.right()));
        case FormulaKind::until:
            return Formula::until(desugar_seq(f.left()), desugar_seq(f.right()));
        case FormulaKind::seq:
            return Formula::conjunction(
                desugar_seq(f.left()),
                Formula::next(Formula::eventually(desugar_seq(f.right()))));
    }
    throw std::logic_error("unreachable formula kind");
}

bool evaluate_trace(const Formula& f, const Trace& t, std::size_t at) {
    if (at >= t.size()) {
        throw Error(Errc::index_out_of_range,
                    "trace position " + std::to_string(at) + " out of range (length " +
                        std::to_string(t.size()) + ")");
    }
    switch (f.kind()) {
        case FormulaKind::atom:
            return (t[at] >> f.prop_index()) & 1u;
        case FormulaKind::negation:
            return !evaluate_trace(f.child(), t, at);
        case FormulaKind::conjunction:
            return evaluate_trace(f.left(), t, at) && evaluate_trace(f.right(), t, at);
        case FormulaKind::disjunction:
            return evaluate_trace(f.left(), t, at) || evaluate_trace(f.right(), t, at);
        case FormulaKind::implication:
            return !evaluate_trace(f.left(), t, at) || evaluate_trace(f.right(), t, at);
        case FormulaKind::next:
            return at + 1 < t.size() && evaluate_trace(f.child(), t, at + 1);
        case FormulaKind::always:
            for (std::size_t k = at; k < t.size(); ++k) {
                if (!evaluate_trace(f.child(), t, k)) return false;
            }
            return true;
        case FormulaKind::eventually:
            for (std::size_t k = at; k < t.size(); ++k) {
                if (evaluate_trace(f.child(), t, k)) return true;
            }
            return false;
        case FormulaKind::until:
            for (std::size_t k = at; k < t.size(); ++k) {
                if (evaluate_trace(f.right(), t, k)) return true;
                if (!evaluate_trace(f.left(), t, k)) return false;
            }
            return false;
        case FormulaKind::seq:
            throw std::logic_error("evaluate_trace requires a Seq-free formula; run desugar_seq");
    }
    throw std::logic_error("unreachable formula kind");
}

namespace {

void collect_props(const Formula& f, std::set<std::size_t>& out) {
    switch (f.kind()) {
        case FormulaKind::atom:
            out.insert(f.prop_index());
            return;
        case FormulaKind::negation:
        case FormulaKind::next:
        case FormulaKind::always:
        case FormulaKind::eventually:
            collect_props(f.child(), out);
            return;
        default:
            collect_props(f.left(), out);
            collect_props(f.right(), out);
            return;
    }
}

}  // namespace

std::vector<std::size_t> free_propositions(const Formula& f) {
    std::set<std::size_t> set;
    collect_props(f, set);
    return std::vector<std::size_t>(set.begin(), set.end());
}

// ---------------------------------------------------------------------------
// Spec file

std::string spec_to_json(const PropositionSet& props, const Formula& formula) {
    nlohmann::json j;
    j["propositions"] = props.texts();
    j["formula"] = to_string(formula, props);
    return j.dump(2) + "\n";
}

SpecFile spec_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::io_error, std::string("spec file is not valid JSON: ") + e.what());
    }
    if (!j.contains("propositions") || !j.contains("formula")) {
        throw Error(Errc::io_error, "spec file needs \"propositions\" and \"formula\"");
    }
    PropositionSet props(j["propositions"].get<std::vector<std::string>>());
    std::string formula_text = j["formula"].get<std::string>();
    Formula f = parse_formula(formula_text, props);
    return SpecFile{std::move(props), std::move(f), std::move(formula_text)};
}

SpecFile load_spec_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open spec file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return spec_from_json(buf.str());
}

void save_spec_file(const std::filesystem::path& path, const PropositionSet& props,
                    const Formula& formula) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::io_error, "cannot write spec file " + path.string());
    out << spec_to_json(props, formula);
}

// ---------------------------------------------------------------------------
// errc names

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::syntax_error: return "SyntaxError";
        case Errc::unknown_proposition: return "UnknownProposition";
        case Errc::index_out_of_range: return "IndexOutOfRange";
        case Errc::layer_out_of_range: return "LayerOutOfRange";
        case Errc::dimension_mismatch: return "DimensionMismatch";
        case Errc::too_many_propositions: return "TooManyPropositions";
        case Errc::monitor_blowup: return "MonitorBlowup";
        case Errc::too_large_for_oracle: return "TooLargeForOracle";
        case Errc::degenerate_dataset: return "DegenerateDataset";
        case Errc::empty_response: return "EmptyResponse";
        case Errc::service_error: return "ServiceError";
        case Errc::malformed_decomposition: return "MalformedDecomposition";
        case Errc::ambiguous_verdict: return "AmbiguousVerdict";
        case Errc::generation_timeout: return "GenerationTimeout";
        case Errc::unreadable_video: return "UnreadableVideo";
        case Errc::resample_error: return "ResampleError";
        case Errc::incompatible_streams: return "IncompatibleStreams";
        case Errc::client_failure: return "ClientFailure";
        case Errc::invalid_argument: return "InvalidArgument";
        case Errc::invalid_config: return "InvalidConfig";
        case Errc::io_error: return "IoError";
    }
    return "Error";
}

}  // namespace vidtl
