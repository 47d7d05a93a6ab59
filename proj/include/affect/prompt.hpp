#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "affect/dialogue.hpp"
#include "affect/error.hpp"
#include "affect/hash.hpp"
#include "affect/rubric.hpp"

namespace affect {

// Scores live on the 0..5 grid in 0.5 steps. They are carried as integer
// half-units (score * 2) so grid membership is never a floating-point question.
using HalfUnits = int;

inline constexpr HalfUnits kMaxHalfUnits = 10;

inline double half_units_to_score(HalfUnits h) { return static_cast<double>(h) / 2.0; }

// Rejects anything not exactly representable on the half-unit grid.
inline std::optional<HalfUnits> score_to_half_units(double score) {
    double doubled = score * 2.0;
    double rounded = std::nearbyint(doubled);
    if (std::abs(doubled - rounded) > 1e-9) return std::nullopt;
    return static_cast<HalfUnits>(rounded);
}

struct PromptAssembly {
    std::string rubric_text;
    std::string rendered_dialogue;
    std::string full_input;
    std::uint64_t content_hash = 0;
    Dialogue dialogue;  // the stripped dialogue the prompt was rendered from
};

struct ScoredLine {
    int index = 0;
    Role speaker = Role::Teacher;
    HalfUnits score = 0;  // half-units, 0..10
    std::string text;

    friend bool operator==(const ScoredLine&, const ScoredLine&) = default;
};

struct TrialResult {
    int trial_id = 0;
    std::vector<ScoredLine> lines;
    std::string raw_response;
};

inline bool same_scores(const TrialResult& a, const TrialResult& b) {
    return a.trial_id == b.trial_id && a.lines == b.lines;
}

class PromptError : public Error {
public:
    explicit PromptError(const std::string& what) : Error(what) {}
};

class TrialParseError : public Error {
public:
    enum class Kind {
        NotJson,
        MalformedElement,
        MissingIndex,
        DuplicateIndex,
        UnexpectedIndex,
        OutOfOrder,
        SpeakerMismatch,
        ScoreOffGrid,
        ScoreOutOfRange,
    };

    TrialParseError(Kind kind, const std::string& what, int index = -1, double value = 0.0)
        : Error(what), kind_(kind), index_(index), value_(value) {}

    Kind kind() const { return kind_; }
    int index() const { return index_; }
    double value() const { return value_; }

private:
    Kind kind_;
    int index_;
    double value_;
};

inline PromptAssembly build_prompt(const Dialogue& d, std::string_view rubric = kRubricText) {
    if (d.utterances.empty()) throw PromptError("cannot build a prompt from an empty dialogue");
    PromptAssembly p;
    p.rubric_text = std::string(rubric);
    std::ostringstream lines;
    for (const auto& u : d.utterances)
        lines << u.index << ". " << to_string(u.role) << ": " << u.text << "\n";
    p.rendered_dialogue = lines.str();
    p.full_input = p.rubric_text + p.rendered_dialogue;
    p.content_hash = fnv1a64(p.full_input);
    p.dialogue = d;
    return p;
}

namespace detail {

// The output contract tolerates surrounding whitespace and one markdown code
// fence; any other prose around the array fails the trial.
inline std::string_view strip_code_fence(std::string_view raw) {
    std::size_t b = 0, e = raw.size();
    while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
    std::string_view body = raw.substr(b, e - b);
    if (body.substr(0, 3) == "```") {
        auto eol = body.find('\n');
        if (eol == std::string_view::npos) return body;
        std::string_view fence_tag = body.substr(3, eol - 3);
        bool tag_ok = true;
        for (unsigned char c : fence_tag)
            if (!std::isalnum(c) && !std::isspace(c)) tag_ok = false;
        auto closing = body.rfind("```");
        if (tag_ok && closing != std::string_view::npos && closing > eol) {
            body = body.substr(eol + 1, closing - eol - 1);
            while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back())))
                body.remove_suffix(1);
        }
    }
    return body;
}

}  // namespace detail

// Validates one model response against the submitted dialogue. Any violation
// rejects the whole trial; there is no per-line salvage.
inline TrialResult parse_trial(std::string_view raw, const Dialogue& d, int trial_id) {
    using Kind = TrialParseError::Kind;
    std::string_view body = detail::strip_code_fence(raw);

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
        throw TrialParseError(Kind::NotJson, "response is not a single valid JSON array");
    }
    if (!j.is_array())
        throw TrialParseError(Kind::NotJson, "response JSON is not an array");

    TrialResult result;
    result.trial_id = trial_id;
    result.raw_response = std::string(raw);

    std::set<int> seen;
    int prev_index = -1;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("index") || !e.contains("speaker") ||
            !e.contains("score") || !e.contains("text") || !e["index"].is_number_integer() ||
            !e["speaker"].is_string() || !e["score"].is_number() || !e["text"].is_string())
            throw TrialParseError(Kind::MalformedElement,
                                  "array element missing index/speaker/score/text fields");
        int index = e["index"].get<int>();
        if (!seen.insert(index).second)
            throw TrialParseError(Kind::DuplicateIndex,
                                  "duplicate index " + std::to_string(index), index);
        if (index <= prev_index)
            throw TrialParseError(Kind::OutOfOrder,
                                  "elements not in chronological index order at " +
                                      std::to_string(index),
                                  index);
        prev_index = index;

        const Utterance* u = d.find_index(index);
        if (u == nullptr)
            throw TrialParseError(Kind::UnexpectedIndex,
                                  "index " + std::to_string(index) + " is not in the dialogue",
                                  index);

        auto speaker = role_from_string(e["speaker"].get<std::string>());
        if (!speaker || *speaker != u->role)
            throw TrialParseError(Kind::SpeakerMismatch,
                                  "speaker mismatch at index " + std::to_string(index), index);

        double score = e["score"].get<double>();
        if (score < 0.0 || score > 5.0)
            throw TrialParseError(Kind::ScoreOutOfRange,
                                  "score out of [0, 5] at index " + std::to_string(index), index,
                                  score);
        auto half = score_to_half_units(score);
        if (!half)
            throw TrialParseError(Kind::ScoreOffGrid,
                                  "score off the 0.5 grid at index " + std::to_string(index),
                                  index, score);

        // Echoed text is aligned by index+speaker only; models may lightly
        // normalize whitespace.
        result.lines.push_back(ScoredLine{index, *speaker, *half, e["text"].get<std::string>()});
    }

    for (const auto& u : d.utterances)
        if (!seen.count(u.index))
            throw TrialParseError(Kind::MissingIndex,
                                  "missing index " + std::to_string(u.index), u.index);

    return result;
}

inline nlohmann::json scored_line_to_json(const ScoredLine& line) {
    nlohmann::json e;
    e["index"] = line.index;
    e["speaker"] = to_string(line.speaker);
    if (line.score % 2 == 0)
        e["score"] = line.score / 2;
    else
        e["score"] = half_units_to_score(line.score);
    e["text"] = line.text;
    return e;
}

inline std::string serialize_trial(const TrialResult& t) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& line : t.lines) arr.push_back(scored_line_to_json(line));
    return arr.dump();
}

}  // namespace affect
