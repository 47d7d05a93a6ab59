#include <catch2/catch.hpp>

#include <random>

#include "affect/prompt.hpp"

#include "test_util.hpp"

using namespace affect;

namespace {

Dialogue scorable_personification() {
    return strip_sentinels(
        parse_dialogue(test_util::read_file(test_util::data_dir() / "fixtures" / "personification.json"),
                       DialogueFormat::Json));
}

Dialogue tiny_dialogue(int n_turns = 3) {
    Dialogue d;
    d.topic = "tiny";
    for (int t = 0; t < n_turns; ++t) {
        d.utterances.push_back({2 * t, t, Role::Teacher, "teacher line " + std::to_string(t)});
        d.utterances.push_back({2 * t + 1, t, Role::Student, "student line " + std::to_string(t)});
    }
    d.n_turns = n_turns;
    return d;
}

TrialParseError::Kind parse_kind(const std::string& raw, const Dialogue& d) {
    try {
        parse_trial(raw, d, 0);
    } catch (const TrialParseError& e) {
        return e.kind();
    }
    FAIL("expected the trial to be rejected");
    return TrialParseError::Kind::NotJson;
}

}  // namespace

TEST_CASE("build_prompt renders the rubric followed by indexed dialogue lines") {
    Dialogue d = scorable_personification();
    PromptAssembly p = build_prompt(d);

    CHECK(p.full_input.rfind("Please act as a professional psychologist.", 0) == 0);
    CHECK(p.full_input == p.rubric_text + p.rendered_dialogue);

    std::size_t lines = 0;
    for (char c : p.rendered_dialogue)
        if (c == '\n') ++lines;
    CHECK(lines == 15);
    CHECK(p.rendered_dialogue.rfind("0. teacher: Today", 0) == 0);

    CHECK(build_prompt(d).content_hash == p.content_hash);
    CHECK(p.rubric_text == std::string(kRubricText));

    Dialogue other = tiny_dialogue();
    CHECK(build_prompt(other).content_hash != p.content_hash);

    CHECK_THROWS_AS(build_prompt(Dialogue{}), PromptError);
}

TEST_CASE("parse_trial accepts a contract-conforming response") {
    Dialogue d = tiny_dialogue(2);
    d.utterances.resize(1);
    d.n_turns = 1;
    TrialResult t = parse_trial(
        R"([{"index":0,"speaker":"teacher","score":2.5,"text":"teacher line 0"}])", d, 7);
    REQUIRE(t.lines.size() == 1);
    CHECK(t.trial_id == 7);
    CHECK(t.lines[0].score == 5);  // 2.5 in half units
    CHECK(half_units_to_score(t.lines[0].score) == 2.5);
}

TEST_CASE("parse_trial tolerates a code fence but nothing else around the array") {
    Dialogue d = tiny_dialogue(2);
    d.utterances.resize(1);
    d.n_turns = 1;
    std::string body = R"([{"index":0,"speaker":"teacher","score":3,"text":"x"}])";

    CHECK(parse_trial("```json\n" + body + "\n```", d, 0).lines.size() == 1);
    CHECK(parse_trial("```\n" + body + "\n```\n", d, 0).lines.size() == 1);
    CHECK(parse_trial("  \n" + body + "\n ", d, 0).lines.size() == 1);
    CHECK(parse_kind("Here are the scores:\n" + body, d) == TrialParseError::Kind::NotJson);
    CHECK(parse_kind(body + "\nHope that helps!", d) == TrialParseError::Kind::NotJson);
    CHECK(parse_kind(R"({"index":0})", d) == TrialParseError::Kind::NotJson);
}

TEST_CASE("parse_trial rejects every contract violation as a whole-trial error") {
    Dialogue d = tiny_dialogue(2);  // indices 0..3

    auto line = [](int index, const char* speaker, double score) {
        nlohmann::json e;
        e["index"] = index;
        e["speaker"] = speaker;
        e["score"] = score;
        e["text"] = "echo";
        return e;
    };
    auto dump = [](std::initializer_list<nlohmann::json> lines) {
        return nlohmann::json(lines).dump();
    };

    std::string valid = dump({line(0, "teacher", 2.5), line(1, "student", 3.0),
                              line(2, "teacher", 2.0), line(3, "student", 4.5)});
    CHECK(parse_trial(valid, d, 0).lines.size() == 4);

    CHECK(parse_kind(dump({line(0, "teacher", 2.7), line(1, "student", 3.0), line(2, "teacher", 2.0),
                           line(3, "student", 4.5)}),
                     d) == TrialParseError::Kind::ScoreOffGrid);
    CHECK(parse_kind(dump({line(0, "teacher", 5.5), line(1, "student", 3.0), line(2, "teacher", 2.0),
                           line(3, "student", 4.5)}),
                     d) == TrialParseError::Kind::ScoreOutOfRange);
    CHECK(parse_kind(dump({line(0, "teacher", -0.5), line(1, "student", 3.0),
                           line(2, "teacher", 2.0), line(3, "student", 4.5)}),
                     d) == TrialParseError::Kind::ScoreOutOfRange);
    CHECK(parse_kind(dump({line(0, "teacher", 2.5), line(1, "student", 3.0), line(3, "student", 4.5)}),
                     d) == TrialParseError::Kind::MissingIndex);
    CHECK(parse_kind(dump({line(0, "teacher", 2.5), line(1, "student", 3.0), line(1, "student", 3.0),
                           line(2, "teacher", 2.0), line(3, "student", 4.5)}),
                     d) == TrialParseError::Kind::DuplicateIndex);
    CHECK(parse_kind(dump({line(0, "student", 2.5), line(1, "student", 3.0), line(2, "teacher", 2.0),
                           line(3, "student", 4.5)}),
                     d) == TrialParseError::Kind::SpeakerMismatch);
    CHECK(parse_kind(dump({line(1, "student", 3.0), line(0, "teacher", 2.5), line(2, "teacher", 2.0),
                           line(3, "student", 4.5)}),
                     d) == TrialParseError::Kind::OutOfOrder);
    CHECK(parse_kind(dump({line(0, "teacher", 2.5), line(1, "student", 3.0), line(2, "teacher", 2.0),
                           line(3, "student", 4.5), line(9, "student", 1.0)}),
                     d) == TrialParseError::Kind::UnexpectedIndex);
    CHECK(parse_kind(R"([{"speaker":"teacher","score":1,"text":"no index"}])", d) ==
          TrialParseError::Kind::MalformedElement);

    SECTION("the reported missing index is the first gap") {
        Dialogue p = scorable_personification();
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& u : p.utterances)
            if (u.index != 7) arr.push_back(line(u.index, to_string(u.role), 2.5));
        try {
            parse_trial(arr.dump(), p, 0);
            FAIL("expected MissingIndex");
        } catch (const TrialParseError& e) {
            CHECK(e.kind() == TrialParseError::Kind::MissingIndex);
            CHECK(e.index() == 7);
        }
    }
}

TEST_CASE("serialize/parse round trip preserves every valid trial") {
    Dialogue d = scorable_personification();
    std::mt19937 rng(20260808);
    std::uniform_int_distribution<int> half(0, kMaxHalfUnits);
    for (int k = 0; k < 50; ++k) {
        TrialResult t;
        t.trial_id = k;
        for (const auto& u : d.utterances)
            t.lines.push_back(ScoredLine{u.index, u.role, half(rng), u.text});
        TrialResult back = parse_trial(serialize_trial(t), d, k);
        CHECK(same_scores(back, t));
        for (const auto& l : back.lines) {
            CHECK(l.score >= 0);
            CHECK(l.score <= kMaxHalfUnits);
        }
    }
}

TEST_CASE("packaged rubric is versioned and fingerprinted") {
    CHECK(kRubricVersion == std::string("1"));
    CHECK(std::string(kRubricText).rfind("Please act as a professional psychologist.", 0) == 0);
    CHECK(std::string(kRubricText).find("The following is the conversation to analyze:") !=
          std::string::npos);
    // frozen fingerprint of the packaged rubric; bump kRubricVersion if it moves
    CHECK(hex64(rubric_hash()) == "4fe5fd36dd3a95be");
}
