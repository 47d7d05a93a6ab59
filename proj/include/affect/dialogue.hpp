#pragma once

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "affect/error.hpp"

namespace affect {

enum class Role { Teacher, Student };

inline const char* to_string(Role r) { return r == Role::Teacher ? "teacher" : "student"; }

inline std::optional<Role> role_from_string(std::string_view s) {
    std::string lowered(s);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lowered == "teacher") return Role::Teacher;
    if (lowered == "student") return Role::Student;
    return std::nullopt;
}

struct Utterance {
    int index = 0;  // global 0-based position in the transcript
    int turn = 0;   // teacher+student exchange number, 0-based
    Role role = Role::Teacher;
    std::string text;

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

// A dyadic transcript in canonical turn-structured form. `n_turns` is always
// max turn value + 1; utterance indices are strictly increasing but may be
// sparse after sentinel removal.
struct Dialogue {
    std::string topic;
    std::map<std::string, std::string> persona;
    std::vector<Utterance> utterances;
    int n_turns = 0;

    friend bool operator==(const Dialogue&, const Dialogue&) = default;

    int complete_turns() const {
        std::map<int, std::pair<bool, bool>> seen;
        for (const auto& u : utterances) {
            auto& [t, s] = seen[u.turn];
            (u.role == Role::Teacher ? t : s) = true;
        }
        int n = 0;
        for (const auto& [turn, roles] : seen)
            if (roles.first && roles.second) ++n;
        return n;
    }

    const Utterance* find_index(int index) const {
        for (const auto& u : utterances)
            if (u.index == index) return &u;
        return nullptr;
    }
};

class DialogueError : public Error {
public:
    enum class Kind { MalformedInput, UnknownRole, EmptyUtterance, TooFewTurns, InvalidStructure };

    DialogueError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

enum class DialogueFormat { Json, Plain };

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Lowercase, drop brackets/quotes/punctuation, collapse whitespace. Used only
// for sentinel matching; transcripts spell the closing marker several ways.
inline std::string normalize_sentinel(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (c == '[' || c == ']' || c == '(' || c == ')' || c == '"' || c == '\'' || c == '`' ||
            c == '.' || c == ',' || c == '!' || c == ';')
            continue;
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

inline void validate_dialogue(const Dialogue& d) {
    int prev_index = -1;
    std::map<int, std::pair<bool, bool>> per_turn;  // turn -> (teacher seen, student seen)
    int max_turn = -1;
    for (const auto& u : d.utterances) {
        if (u.index <= prev_index)
            throw DialogueError(DialogueError::Kind::InvalidStructure,
                                "utterance indices must be strictly increasing (at index " +
                                    std::to_string(u.index) + ")");
        prev_index = u.index;
        if (u.turn < 0)
            throw DialogueError(DialogueError::Kind::InvalidStructure, "negative turn number");
        if (trim(u.text).empty())
            throw DialogueError(DialogueError::Kind::EmptyUtterance,
                                "empty utterance text at index " + std::to_string(u.index));
        auto& [teacher_seen, student_seen] = per_turn[u.turn];
        if (u.role == Role::Teacher) {
            if (teacher_seen)
                throw DialogueError(DialogueError::Kind::InvalidStructure,
                                    "two teacher utterances in turn " + std::to_string(u.turn));
            if (student_seen)
                throw DialogueError(DialogueError::Kind::InvalidStructure,
                                    "teacher must precede student in turn " + std::to_string(u.turn));
            teacher_seen = true;
        } else {
            if (student_seen)
                throw DialogueError(DialogueError::Kind::InvalidStructure,
                                    "two student utterances in turn " + std::to_string(u.turn));
            student_seen = true;
        }
        max_turn = std::max(max_turn, u.turn);
    }
    if (d.utterances.empty())
        throw DialogueError(DialogueError::Kind::MalformedInput, "dialogue has no utterances");
    if (d.n_turns != max_turn + 1)
        throw DialogueError(DialogueError::Kind::InvalidStructure,
                            "n_turns must equal max turn value + 1");
}

}  // namespace detail

inline bool is_sentinel_text(std::string_view text) {
    return detail::normalize_sentinel(text) == "end of conversation";
}

inline Dialogue parse_dialogue_json(std::string_view source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(source);
    } catch (const nlohmann::json::exception& e) {
        throw DialogueError(DialogueError::Kind::MalformedInput,
                            std::string("invalid dialogue JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("utterances") || !j["utterances"].is_array())
        throw DialogueError(DialogueError::Kind::MalformedInput,
                            "dialogue JSON must be an object with an utterances array");

    Dialogue d;
    d.topic = j.value("topic", std::string{});
    if (j.contains("persona")) {
        if (!j["persona"].is_object())
            throw DialogueError(DialogueError::Kind::MalformedInput, "persona must be an object");
        for (const auto& [key, value] : j["persona"].items()) {
            if (!value.is_string())
                throw DialogueError(DialogueError::Kind::MalformedInput,
                                    "persona values must be strings");
            d.persona[key] = value.get<std::string>();
        }
    }
    int max_turn = -1;
    for (const auto& e : j["utterances"]) {
        if (!e.is_object() || !e.contains("index") || !e.contains("turn") || !e.contains("role") ||
            !e.contains("text") || !e["index"].is_number_integer() ||
            !e["turn"].is_number_integer() || !e["role"].is_string() || !e["text"].is_string())
            throw DialogueError(DialogueError::Kind::MalformedInput,
                                "each utterance needs integer index/turn and string role/text");
        Utterance u;
        u.index = e["index"].get<int>();
        u.turn = e["turn"].get<int>();
        if (u.index < 0)
            throw DialogueError(DialogueError::Kind::MalformedInput, "negative utterance index");
        auto role = role_from_string(e["role"].get<std::string>());
        if (!role)
            throw DialogueError(DialogueError::Kind::UnknownRole,
                                "unknown role label: " + e["role"].get<std::string>());
        u.role = *role;
        u.text = e["text"].get<std::string>();
        max_turn = std::max(max_turn, u.turn);
        d.utterances.push_back(std::move(u));
    }
    d.n_turns = max_turn + 1;
    detail::validate_dialogue(d);
    if (d.complete_turns() < 3)
        throw DialogueError(DialogueError::Kind::TooFewTurns,
                            "dialogue needs at least 3 complete teacher+student turns, got " +
                                std::to_string(d.complete_turns()));
    return d;
}

inline Dialogue parse_dialogue_plain(std::string_view source) {
    Dialogue d;
    std::istringstream in{std::string(source)};
    std::string line;
    int index = 0;
    int turn = -1;
    bool turn_has_teacher = false;
    bool turn_has_student = false;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        if (trimmed.front() == '#') {
            std::string body = detail::trim(trimmed.substr(1));
            constexpr std::string_view key = "topic:";
            if (first_content_line && body.size() >= key.size()) {
                std::string head = body.substr(0, key.size());
                std::transform(head.begin(), head.end(), head.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                if (head == key) d.topic = detail::trim(body.substr(key.size()));
            }
            first_content_line = false;
            continue;
        }
        first_content_line = false;
        auto colon = trimmed.find(':');
        if (colon == std::string::npos)
            throw DialogueError(DialogueError::Kind::MalformedInput,
                                "expected \"Teacher:\" or \"Student:\" prefix: " + trimmed);
        std::string label = detail::trim(trimmed.substr(0, colon));
        auto role = role_from_string(label);
        if (!role)
            throw DialogueError(DialogueError::Kind::UnknownRole, "unknown role label: " + label);
        std::string text = detail::trim(trimmed.substr(colon + 1));
        if (text.empty())
            throw DialogueError(DialogueError::Kind::EmptyUtterance,
                                "empty utterance text on line: " + trimmed);

        // Turn assignment: a teacher line always opens a new exchange unless the
        // current one is empty; a student line joins the open exchange when it
        // still lacks a student.
        if (*role == Role::Teacher) {
            if (turn < 0 || turn_has_teacher || turn_has_student) {
                ++turn;
                turn_has_teacher = turn_has_student = false;
            }
            turn_has_teacher = true;
        } else {
            if (turn < 0 || turn_has_student) {
                ++turn;
                turn_has_teacher = turn_has_student = false;
            }
            turn_has_student = true;
        }
        d.utterances.push_back(Utterance{index++, turn, *role, std::move(text)});
    }
    d.n_turns = turn + 1;
    detail::validate_dialogue(d);
    if (d.complete_turns() < 3)
        throw DialogueError(DialogueError::Kind::TooFewTurns,
                            "dialogue needs at least 3 complete teacher+student turns, got " +
                                std::to_string(d.complete_turns()));
    return d;
}

inline Dialogue parse_dialogue(std::string_view source, DialogueFormat format) {
    return format == DialogueFormat::Json ? parse_dialogue_json(source)
                                          : parse_dialogue_plain(source);
}

inline Dialogue parse_dialogue(std::istream& in, DialogueFormat format) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dialogue(buf.str(), format);
}

// Removes utterances that are pure end-of-dialogue markers. Indices and turn
// numbers of the survivors are preserved; n_turns is recomputed.
inline Dialogue strip_sentinels(const Dialogue& d) {
    Dialogue out;
    out.topic = d.topic;
    out.persona = d.persona;
    int max_turn = -1;
    for (const auto& u : d.utterances) {
        if (is_sentinel_text(u.text)) continue;
        max_turn = std::max(max_turn, u.turn);
        out.utterances.push_back(u);
    }
    out.n_turns = max_turn + 1;
    return out;
}

inline nlohmann::json dialogue_to_json(const Dialogue& d) {
    nlohmann::json j;
    j["topic"] = d.topic;
    if (!d.persona.empty()) {
        nlohmann::json p = nlohmann::json::object();
        for (const auto& [k, v] : d.persona) p[k] = v;
        j["persona"] = p;
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& u : d.utterances) {
        arr.push_back({{"index", u.index},
                       {"turn", u.turn},
                       {"role", to_string(u.role)},
                       {"text", u.text}});
    }
    j["utterances"] = arr;
    return j;
}

inline std::string serialize_dialogue(const Dialogue& d) { return dialogue_to_json(d).dump(2) + "\n"; }

}  // namespace affect
