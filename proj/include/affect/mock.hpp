#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "affect/error.hpp"
#include "affect/format.hpp"
#include "affect/prompt.hpp"

namespace affect {

class MockSpecError : public Error {
public:
    explicit MockSpecError(const std::string& what) : Error(what) {}
};

// Discrete distribution over the half-unit score grid. Weight order is
// preserved so inverse-CDF draws are reproducible byte for byte.
struct ScoreDistribution {
    std::vector<std::pair<HalfUnits, double>> weights;

    void validate() const {
        if (weights.empty()) throw MockSpecError("empty score distribution");
        double total = 0.0;
        for (const auto& [half, p] : weights) {
            if (half < 0 || half > kMaxHalfUnits)
                throw MockSpecError("mock score off the 0..5 half-step grid");
            if (p < 0.0) throw MockSpecError("negative probability in mock distribution");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw MockSpecError("mock distribution probabilities must sum to 1, got " +
                                format_double(total));
    }

    HalfUnits sample(double u) const {
        double cum = 0.0;
        for (const auto& [half, p] : weights) {
            cum += p;
            if (u < cum) return half;
        }
        return weights.back().first;
    }

    double mean_score() const {
        double m = 0.0;
        for (const auto& [half, p] : weights) m += half_units_to_score(half) * p;
        return m;
    }
};

// Per-utterance latent score distributions for the deterministic provider.
struct MockSpec {
    std::optional<ScoreDistribution> fallback;
    std::map<int, ScoreDistribution> per_utterance;

    void validate() const {
        if (fallback) fallback->validate();
        for (const auto& [index, dist] : per_utterance) {
            if (index < 0) throw MockSpecError("negative utterance index in mock spec");
            dist.validate();
        }
    }

    const ScoreDistribution& distribution_for(int utterance_index) const {
        auto it = per_utterance.find(utterance_index);
        if (it != per_utterance.end()) return it->second;
        if (fallback) return *fallback;
        throw MockSpecError("mock spec has no distribution for utterance " +
                            std::to_string(utterance_index));
    }
};

namespace detail {

inline ScoreDistribution score_distribution_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw MockSpecError("distribution must be an array of [score, prob] pairs");
    ScoreDistribution dist;
    for (const auto& pair : j) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
            throw MockSpecError("distribution entries must be [score, prob] pairs");
        auto half = score_to_half_units(pair[0].get<double>());
        if (!half) throw MockSpecError("mock score off the 0.5 grid: " +
                                       format_double(pair[0].get<double>()));
        dist.weights.emplace_back(*half, pair[1].get<double>());
    }
    return dist;
}

inline MockSpec mock_spec_from_section(const nlohmann::json& j) {
    MockSpec spec;
    if (j.contains("default")) spec.fallback = score_distribution_from_json(j["default"]);
    if (j.contains("utterances")) {
        if (!j["utterances"].is_object())
            throw MockSpecError("\"utterances\" must map index strings to distributions");
        for (const auto& [key, value] : j["utterances"].items()) {
            int index = 0;
            try {
                index = std::stoi(key);
            } catch (...) {
                throw MockSpecError("utterance keys must be integer strings, got \"" + key + "\"");
            }
            spec.per_utterance[index] = score_distribution_from_json(value);
        }
    }
    spec.validate();
    return spec;
}

}  // namespace detail

// Loads a mock spec, resolving the section for `temperature` when the file
// carries a "by_temperature" map (keys are shortest-form numbers: "0.7", "1").
inline MockSpec load_mock_spec(const nlohmann::json& j, double temperature) {
    if (!j.is_object()) throw MockSpecError("mock spec must be a JSON object");
    if (j.contains("by_temperature")) {
        const auto& sections = j["by_temperature"];
        if (!sections.is_object()) throw MockSpecError("\"by_temperature\" must be an object");
        std::string key = format_double(temperature);
        if (!sections.contains(key))
            throw MockSpecError("mock spec has no section for temperature " + key);
        return detail::mock_spec_from_section(sections[key]);
    }
    return detail::mock_spec_from_section(j);
}

inline MockSpec parse_mock_spec(const std::string& text, double temperature) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw MockSpecError(std::string("invalid mock spec JSON: ") + e.what());
    }
    return load_mock_spec(j, temperature);
}

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Counter-based uniform draw keyed by (seed, trial, utterance): the value
// depends only on the key, never on call order, so parallel execution and
// reruns produce identical trials.
inline double mock_uniform(std::uint64_t seed, int trial_id, int utterance_index) noexcept {
    std::uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ static_cast<std::uint64_t>(trial_id));
    k = splitmix64(k ^ static_cast<std::uint64_t>(utterance_index));
    return static_cast<double>(k >> 11) * 0x1.0p-53;
}

// Renders the strict-JSON response one real model trial would produce.
inline std::string mock_response(const MockSpec& spec, const Dialogue& d, std::uint64_t seed,
                                 int trial_id) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& u : d.utterances) {
        const auto& dist = spec.distribution_for(u.index);
        HalfUnits half = dist.sample(mock_uniform(seed, trial_id, u.index));
        ScoredLine line{u.index, u.role, half, u.text};
        arr.push_back(scored_line_to_json(line));
    }
    return arr.dump();
}

}  // namespace affect
