#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vidtl/errors.hpp"

namespace vidtl {

/// Atomic proposition: its position in the owning set plus the surface text
/// used in prompts and formulas (e.g. "person is meditating").
struct Proposition {
    std::size_t index = 0;
    std::string text;
};

/// Ordered set of atomic propositions. Texts must be unique after trimming
/// surrounding whitespace and lowercasing; lookups use the same normalization.
class PropositionSet {
  public:
    PropositionSet() = default;
    explicit PropositionSet(std::vector<std::string> texts);

    std::size_t size() const { return props_.size(); }
    bool empty() const { return props_.empty(); }
    const Proposition& at(std::size_t i) const;
    const std::vector<Proposition>& all() const { return props_; }

    /// Index of the proposition whose normalized text matches, if any.
    std::optional<std::size_t> find(std::string_view text) const;

    std::vector<std::string> texts() const;

    static std::string normalize(std::string_view text);

    bool operator==(const PropositionSet& other) const;

  private:
    std::vector<Proposition> props_;
};

enum class FormulaKind {
    atom,
    negation,
    conjunction,
    disjunction,
    implication,
    next,
    always,
    eventually,
    until,
    seq,  // derived infix-X sequencing; removed by desugar_seq
};

/// Immutable temporal-logic formula AST with shared structure.
class Formula {
  public:
    static Formula atom(std::size_t prop_index);
    static Formula atom(const Proposition& p) { return atom(p.index); }
    static Formula negation(Formula f);
    static Formula conjunction(Formula lhs, Formula rhs);
    static Formula disjunction(Formula lhs, Formula rhs);
    static Formula implication(Formula lhs, Formula rhs);
    static Formula next(Formula f);
    static Formula always(Formula f);
    static Formula eventually(Formula f);
    static Formula until(Formula lhs, Formula rhs);
    static Formula seq(Formula lhs, Formula rhs);

    FormulaKind kind() const;
    bool is_unary() const;
    bool is_binary() const;

    std::size_t prop_index() const;  // atom only
    const Formula& child() const;    // unary only
    const Formula& left() const;     // binary only
    const Formula& right() const;    // binary only

    /// Structural equality.
    bool operator==(const Formula& other) const;
    bool operator!=(const Formula& other) const { return !(*this == other); }

  private:
    struct Node;
    explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// One trace step: bit i set means proposition i holds at that step.
using Label = std::uint64_t;
/// Finite trace of label sets, length >= 1.
using Trace = std::vector<Label>;

/// Parse the concrete formula syntax.
///
/// Grammar (loosest to tightest):
///   implication  :=  disjunction ('->' implication)?        right-assoc
///   disjunction  :=  conjunction ('|' conjunction)*
///   conjunction  :=  sequence ('&' sequence)*
///   sequence     :=  until ('X' sequence)?                  binary X, right-assoc
///   until        :=  unary ('U' until)?                     right-assoc
///   unary        :=  ('!' | 'G' | 'F' | 'X') unary | primary
///   primary      :=  '(' implication ')' | '"' text '"'
///
/// Quoted atoms resolve against `props` (normalized match). `a -> b` is
/// rewritten to `!a | b` during parsing. Binary infix X produces a Seq node;
/// see desugar_seq for its meaning.
Formula parse_formula(std::string_view text, const PropositionSet& props);

/// Render a formula in the concrete syntax with minimal parentheses.
/// parse_formula(to_string(f)) reproduces f exactly.
std::string to_string(const Formula& f, const PropositionSet& props);

/// Rewrite every Seq(a, b) to And(a, Next(Eventually(b))): "a now, b strictly
/// later". Idempotent; the result contains no Seq nodes.
Formula desugar_seq(const Formula& f);

/// Finite-trace semantics at position `at`. Next is strong (false at the last
/// position). The formula must be Seq-free.
bool evaluate_trace(const Formula& f, const Trace& t, std::size_t at);

/// Sorted indices of the propositions referenced by f.
std::vector<std::size_t> free_propositions(const Formula& f);

/// On-disk specification: { "propositions": [...], "formula": "..." }.
struct SpecFile {
    PropositionSet props;
    Formula formula;
    std::string formula_text;
};

SpecFile load_spec_file(const std::filesystem::path& path);
void save_spec_file(const std::filesystem::path& path, const PropositionSet& props,
                    const Formula& formula);
std::string spec_to_json(const PropositionSet& props, const Formula& formula);
SpecFile spec_from_json(const std::string& text);

}  // namespace vidtl
