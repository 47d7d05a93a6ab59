#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "affect/dyadic.hpp"
#include "affect/estimator.hpp"
#include "affect/format.hpp"

namespace affect {

inline constexpr int kReportSchemaVersion = 1;

struct ReportMeta {
    int trials_requested = 0;
    int effective_trials = 0;
    int dropped_trials = 0;
    std::string rubric_version;
    std::string rubric_hash_hex;
    bool canonical = false;
};

namespace detail {

inline nlohmann::json estimate_to_json(const AffectEstimate& e) {
    return {{"utterance_index", e.utterance_index},
            {"turn", e.turn},
            {"role", to_string(e.role)},
            {"raw_mean", e.raw_mean},
            {"raw_variance", e.raw_variance},
            {"std_mean", e.std_mean},
            {"std_variance", e.std_variance},
            {"k_used", e.k_used}};
}

inline nlohmann::json slope_to_json(const SlopeIndicator& s) {
    return {{"role", to_string(s.role)},
            {"beta", s.beta},
            {"n_points", s.n_points},
            {"mean_turn", s.mean_turn},
            {"mean_value", s.mean_value}};
}

}  // namespace detail

// Everything needed to recompute the classification offline lives here:
// both trajectories, the full correlogram, the slopes and the dead band.
inline nlohmann::json report_to_json(const DyadReport& report, const NccfOptions& nccf_opts,
                                     const ReportMeta& meta) {
    nlohmann::json j;
    j["schema_version"] = kReportSchemaVersion;
    j["topic"] = report.trajectories.topic;

    const auto& prov = report.trajectories.provenance;
    nlohmann::json p;
    p["provider"] = prov.provider;
    p["model"] = prov.model_name;
    p["temperature"] = prov.temperature;
    p["prompt_hash"] = hex64(prov.prompt_hash);
    p["seed"] = prov.seed;
    p["rubric_version"] = meta.rubric_version;
    p["rubric_hash"] = meta.rubric_hash_hex;
    p["trials_requested"] = meta.trials_requested;
    p["effective_trials"] = meta.effective_trials;
    p["dropped_trials"] = meta.dropped_trials;
    p["kde_bandwidth_rule"] = "silverman";
    p["kde_bandwidth_floor"] = kKdeBandwidthFloor;
    if (!meta.canonical && !prov.timestamp.empty()) p["timestamp"] = prov.timestamp;
    j["provenance"] = p;

    j["analysis_config"] = {{"lag_min", nccf_opts.lag_min},
                            {"lag_max", nccf_opts.lag_max},
                            {"min_overlap", nccf_opts.min_overlap},
                            {"centering", nccf_opts.per_overlap_centering ? "per-overlap" : "whole-series"},
                            {"slope_band", report.slope_band}};

    nlohmann::json teacher = nlohmann::json::array();
    for (const auto& e : report.trajectories.teacher.points)
        teacher.push_back(detail::estimate_to_json(e));
    nlohmann::json student = nlohmann::json::array();
    for (const auto& e : report.trajectories.student.points)
        student.push_back(detail::estimate_to_json(e));
    j["trajectories"] = {{"teacher", teacher}, {"student", student}};

    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.correlogram.entries) {
        nlohmann::json entry = {{"lag", e.lag},
                                {"overlap", e.overlap},
                                {"defined", e.defined()},
                                {"is_optimal", e.defined() && e.lag == report.correlogram.optimal_lag}};
        if (e.defined()) entry["r"] = *e.r;
        entries.push_back(entry);
    }
    j["correlogram"] = {{"lag_min", report.correlogram.lag_min},
                        {"lag_max", report.correlogram.lag_max},
                        {"optimal_lag", report.correlogram.optimal_lag},
                        {"optimal_r", report.correlogram.optimal_r},
                        {"entries", entries}};

    j["slopes"] = {{"teacher", detail::slope_to_json(report.slope_teacher)},
                   {"student", detail::slope_to_json(report.slope_student)}};
    j["typology"] = {{"label", to_string(report.typology)}, {"slope_band", report.slope_band}};
    return j;
}

inline std::string serialize_report(const DyadReport& report, const NccfOptions& nccf_opts,
                                    const ReportMeta& meta) {
    return report_to_json(report, nccf_opts, meta).dump(2) + "\n";
}

inline std::string trajectories_csv(const DyadTrajectories& t) {
    std::vector<const AffectEstimate*> rows;
    for (const auto& e : t.teacher.points) rows.push_back(&e);
    for (const auto& e : t.student.points) rows.push_back(&e);
    std::sort(rows.begin(), rows.end(), [](const AffectEstimate* a, const AffectEstimate* b) {
        if (a->turn != b->turn) return a->turn < b->turn;
        return a->role == Role::Teacher && b->role == Role::Student;
    });
    std::string out = "turn,role,raw_mean,raw_variance,std_mean,std_variance,k_used\n";
    for (const auto* e : rows) {
        out += std::to_string(e->turn) + "," + to_string(e->role) + "," +
               format_double(e->raw_mean) + "," + format_double(e->raw_variance) + "," +
               format_double(e->std_mean) + "," + format_double(e->std_variance) + "," +
               std::to_string(e->k_used) + "\n";
    }
    return out;
}

inline std::string correlogram_csv(const Correlogram& gram) {
    std::string out = "lag,r,overlap,is_optimal\n";
    for (const auto& e : gram.entries) {
        out += std::to_string(e.lag) + ",";
        if (e.defined()) out += format_double(*e.r);
        out += "," + std::to_string(e.overlap) + "," +
               ((e.defined() && e.lag == gram.optimal_lag) ? "true" : "false") + "\n";
    }
    return out;
}

inline nlohmann::json kde_to_json(const KdeProfile& k, int utterance_index) {
    nlohmann::json j;
    j["utterance_index"] = utterance_index;
    j["point_mass"] = k.point_mass;
    j["n_samples"] = k.n_samples;
    if (k.point_mass) {
        j["location"] = k.location;
    } else {
        j["bandwidth"] = k.bandwidth;
        j["grid"] = k.grid;
        j["density"] = k.density;
    }
    return j;
}

}  // namespace affect
