#include "vidtl/clients.hpp"

#include <algorithm>
#include <cctype>

namespace vidtl {

void ClientConfig::validate() const {
    if (timeout_seconds <= 0.0) throw Error(Errc::invalid_config, "timeout must be positive");
    if (max_retries < 0) throw Error(Errc::invalid_config, "retries must be >= 0");
    if (parallelism < 1) throw Error(Errc::invalid_config, "parallelism must be >= 1");
}

void GenerationRequest::validate() const {
    if (prompt.empty()) throw Error(Errc::invalid_argument, "generation prompt must be non-empty");
}

// ---------------------------------------------------------------------------
// Prompt templates

namespace {

const char* kDecompositionSystem =
    "Your input field is:\n"
    "- `input_prompt` (str): Input prompt summarizing what happened in a video.\n"
    "\n"
    "Your output fields are:\n"
    "- `input_propositions` (str): A list of atomic propositions that correlate with the "
    "inputted prompt formatted as [proposition_1, proposition_2, ...].\n"
    "- `output_specification` (str): The formal specification of the inputted prompt. This is a "
    "temporal logic sequence made by combining the inputted propositions with temporal logic "
    "symbols.\n"
    "\n"
    "Your objective is:\n"
    "- Convert the prompt into a list of propositions and a temporal logic specification using "
    "the specified schema.\n";

const char* kContinuationSystem =
    "You are tasked with refining video narratives generated by text-to-video models based on "
    "user feedback. For each case, you will receive two inputs:\n"
    "\n"
    "1. Original Prompt: A description of the intended video narrative.\n"
    "2. Feedback: Textual guidance on what is missing or needs adjustment in the video.\n"
    "\n"
    "Respond with a single prompt for generating the next video segment so that the feedback is "
    "addressed. Output only the new prompt text.\n";

std::string trim_copy(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower_copy(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

std::vector<ChatMessage> build_decomposition_messages(const std::string& prompt) {
    std::vector<ChatMessage> messages;
    messages.push_back({"system", kDecompositionSystem});
    messages.push_back({"user", "Input Prompt: " + prompt +
                                    "\n\nRespond with the corresponding output fields."});
    return messages;
}

std::string continuation_feedback_template() {
    return "The video is missing \"{weakest}\"; the next segment must clearly show it.";
}

std::vector<ChatMessage> build_continuation_messages(const std::string& original_prompt,
                                                     const Proposition& weakest) {
    std::string feedback = continuation_feedback_template();
    const std::string placeholder = "{weakest}";
    feedback.replace(feedback.find(placeholder), placeholder.size(), weakest.text);
    std::vector<ChatMessage> messages;
    messages.push_back({"system", kContinuationSystem});
    messages.push_back({"user", "Original Prompt: " + original_prompt + "\nFeedback: " + feedback});
    return messages;
}

std::string build_scoring_prompt(const Proposition& p) {
    return "Is there " + p.text +
           " present in the sequence of frames?\n"
           "\n"
           "[PARSING RULE] 1. You must only return a Yes or No, and not both, to any question "
           "asked.\n"
           "\n"
           "2. You must not include any other symbols, information, text, or justification in "
           "your answer or repeat Yes or No multiple times.\n"
           "\n"
           "3. For example, if the question is 'Is there a cat present in the Image?', the "
           "answer must only be 'Yes' or 'No'.";
}

std::string build_edit_instruction(const Proposition& weakest) {
    return "Add " + weakest.text + " to the image";
}

// ---------------------------------------------------------------------------
// Decomposition reply parsing

namespace {

std::optional<std::string> field_after(const std::string& reply, const std::string& field) {
    const std::string needle = lower_copy(field);
    const std::string haystack = lower_copy(reply);
    const auto at = haystack.find(needle);
    if (at == std::string::npos) return std::nullopt;
    const auto start = at + needle.size();
    auto end = reply.find('\n', start);
    if (end == std::string::npos) end = reply.size();
    return trim_copy(reply.substr(start, end - start));
}

std::vector<std::string> parse_bracketed_list(const std::string& text) {
    const auto open = text.find('[');
    const auto close = text.rfind(']');
    if (open == std::string::npos || close == std::string::npos || close <= open) {
        throw Error(Errc::malformed_decomposition, "propositions are not a bracketed list");
    }
    std::vector<std::string> items;
    std::string current;
    bool in_quotes = false;
    char quote = 0;
    for (std::size_t i = open + 1; i < close; ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == quote) {
                in_quotes = false;
            } else {
                current.push_back(c);
            }
            continue;
        }
        if (c == '\'' || c == '"' || c == '`') {
            in_quotes = true;
            quote = (c == '`') ? '\'' : c;  // tolerate `typographic' quoting
            continue;
        }
        if (c == ',') {
            items.push_back(trim_copy(current));
            current.clear();
            continue;
        }
        current.push_back(c);
    }
    if (!trim_copy(current).empty()) items.push_back(trim_copy(current));
    items.erase(std::remove_if(items.begin(), items.end(),
                               [](const std::string& s) { return s.empty(); }),
                items.end());
    if (items.empty()) {
        throw Error(Errc::malformed_decomposition, "empty proposition list");
    }
    return items;
}

}  // namespace

RawDecomposition parse_decomposition_reply(const std::string& reply) {
    const auto props_line = field_after(reply, "output propositions:");
    const auto spec_line = field_after(reply, "output specification:");
    if (!props_line || !spec_line || spec_line->empty()) {
        throw Error(Errc::malformed_decomposition,
                    "reply lacks Output Propositions / Output Specification lines");
    }
    return RawDecomposition{parse_bracketed_list(*props_line), *spec_line};
}

std::string normalize_specification(const std::string& raw, const PropositionSet& props) {
    // Unicode operator forms first, then quote bare proposition texts.
    static const std::vector<std::pair<std::string, std::string>> kOps = {
        {"∧", " & "},   // wedge
        {"∨", " | "},   // vee
        {"¬", " ! "},   // not sign
        {"⇒", " -> "},  // double arrow
        {"→", " -> "},  // single arrow
        {"□", " G "},       // white square
        {"◇", " F "},       // white diamond
        {"⋄", " F "},       // diamond operator
        {"◊", " F "},       // lozenge
        {"\U0001d5b4", " U "},   // sans-serif U
        {"\U0001d5b7", " X "},   // sans-serif X
    };
    std::string text = raw;
    for (const auto& [from, to] : kOps) {
        std::size_t at = 0;
        while ((at = text.find(from, at)) != std::string::npos) {
            text.replace(at, from.size(), to);
            at += to.size();
        }
    }

    // Longest proposition first so "person is standing still" is not eaten by
    // "person is standing".
    std::vector<const Proposition*> by_length;
    for (const auto& p : props.all()) by_length.push_back(&p);
    std::sort(by_length.begin(), by_length.end(),
              [](const Proposition* a, const Proposition* b) {
                  return a->text.size() > b->text.size();
              });

    const std::string haystack = lower_copy(text);
    std::string out;
    std::size_t i = 0;
    bool in_quotes = false;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '"') {
            in_quotes = !in_quotes;
            out.push_back(c);
            ++i;
            continue;
        }
        if (!in_quotes) {
            const Proposition* hit = nullptr;
            for (const auto* p : by_length) {
                const std::string needle = lower_copy(PropositionSet::normalize(p->text));
                if (haystack.compare(i, needle.size(), needle) != 0) continue;
                const bool left_ok = i == 0 || !std::isalnum(static_cast<unsigned char>(text[i - 1]));
                const std::size_t after = i + needle.size();
                const bool right_ok =
                    after >= text.size() || !std::isalnum(static_cast<unsigned char>(text[after]));
                if (left_ok && right_ok) {
                    hit = p;
                    break;
                }
            }
            if (hit) {
                out.push_back('"');
                for (const char pc : hit->text) {
                    if (pc == '"' || pc == '\\') out.push_back('\\');
                    out.push_back(pc);
                }
                out.push_back('"');
                i += PropositionSet::normalize(hit->text).size();
                continue;
            }
        }
        out.push_back(c);
        ++i;
    }
    return out;
}

DecompositionResult decompose_prompt(ChatClient& chat, const std::string& prompt) {
    if (prompt.empty()) throw Error(Errc::invalid_argument, "prompt must be non-empty");
    auto messages = build_decomposition_messages(prompt);

    std::string parse_failure;
    for (int attempt = 0; attempt < 2; ++attempt) {
        if (attempt == 1) {
            messages.back().content +=
                "\n\nThe previous specification failed to parse: " + parse_failure +
                ". Use only the listed propositions combined with the operators & | ! -> G F X U "
                "and parentheses.";
        }
        const ChatResponse response = chat.complete(messages);
        try {
            const RawDecomposition raw = parse_decomposition_reply(response.content);
            PropositionSet props(raw.propositions);
            if (props.empty()) {
                throw Error(Errc::malformed_decomposition, "no propositions");
            }
            const std::string normalized = normalize_specification(raw.specification, props);
            Formula f = parse_formula(normalized, props);
            return DecompositionResult{std::move(props), std::move(f), normalized};
        } catch (const Error& e) {
            parse_failure = e.what();
        }
    }
    throw Error(Errc::malformed_decomposition, parse_failure);
}

double frame_score_from_response(const ChatResponse& response, const CalibrationModel& cal) {
    const std::string verdict = lower_copy(trim_copy(response.content));
    const bool yes = verdict == "yes" || verdict == "yes.";
    const bool no = verdict == "no" || verdict == "no.";
    if (yes == no) {
        throw Error(Errc::ambiguous_verdict,
                    "expected exactly Yes or No, got \"" + response.content + "\"");
    }
    double confidence =
        response.tokens.empty() ? 1.0 : token_confidence(response.tokens);
    confidence = std::clamp(confidence, 0.0, 1.0);
    const double raw = yes ? confidence : 1.0 - confidence;
    return apply_calibration(cal, std::clamp(raw, 0.0, 1.0));
}

double score_frame(VisionClient& vision, const Proposition& p, const std::string& image_payload,
                   const CalibrationModel& cal) {
    if (image_payload.empty()) {
        throw Error(Errc::invalid_argument, "frame payload must be non-empty");
    }
    const ChatResponse response = vision.ask(build_scoring_prompt(p), image_payload);
    return frame_score_from_response(response, cal);
}

std::string continuation_prompt(ChatClient& chat, const std::string& original_prompt,
                                const Proposition& weakest) {
    if (weakest.text.empty()) {
        throw Error(Errc::invalid_argument, "weakest proposition must carry text");
    }
    const ChatResponse response = chat.complete(
        build_continuation_messages(original_prompt, weakest));
    const std::string text = trim_copy(response.content);
    if (text.empty()) throw Error(Errc::empty_response, "continuation service returned nothing");
    return text;
}

std::filesystem::path edit_keyframe(ImageEditClient& editor, const std::filesystem::path& frame,
                                    const Proposition& weakest,
                                    const std::filesystem::path& dest,
                                    std::uintmax_t max_image_bytes) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(frame, ec);
    if (ec) throw Error(Errc::io_error, "cannot stat keyframe " + frame.string());
    if (size > max_image_bytes) {
        throw Error(Errc::invalid_argument, "keyframe exceeds the image byte budget");
    }
    return editor.edit(frame, build_edit_instruction(weakest), dest);
}

}  // namespace vidtl
