#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "affect/dialogue.hpp"
#include "affect/dyadic.hpp"
#include "affect/error.hpp"
#include "affect/estimator.hpp"
#include "affect/gateway.hpp"
#include "affect/prompt.hpp"
#include "affect/report.hpp"
#include "affect/rubric.hpp"
#include "affect/svg.hpp"

namespace affect {

class PipelineError : public Error {
public:
    enum class Kind { Usage, Io, MismatchedReports };

    PipelineError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct RunConfig {
    std::vector<std::string> inputs;
    std::optional<DialogueFormat> format;  // deduced from the extension when unset
    SamplerConfig sampler;
    NccfOptions nccf;
    double slope_band = kDefaultSlopeBand;
    std::string out_dir = "out";
    std::vector<double> sweep_temperatures;
    std::vector<std::string> compare_models;
    bool emit_plots = false;
    bool canonical = false;             // omit timestamps and wall time from outputs
    std::string mock_spec_path;         // required in mock mode
    std::string rubric_path;            // optional custom rubric file
    std::vector<int> kde_utterances;    // emit kde_<index>.json for these
    std::function<std::unique_ptr<Provider>(const SamplerConfig&)> remote_provider_factory;
};

struct RunFailure {
    std::string input;
    std::string error;
};

struct RunManifest {
    std::string out_dir;
    std::vector<std::string> artifacts;  // sorted, relative to out_dir
    std::vector<RunFailure> failures;
    CacheStats cache;
    std::int64_t wall_ms = 0;
    std::string rubric_version;
    std::string rubric_hash_hex;
    nlohmann::json config_echo;
};

namespace detail {

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw PipelineError(PipelineError::Kind::Io, "cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PipelineError(PipelineError::Kind::Io, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline DialogueFormat deduce_format(const std::filesystem::path& path,
                                    std::optional<DialogueFormat> forced) {
    if (forced) return *forced;
    return path.extension() == ".json" ? DialogueFormat::Json : DialogueFormat::Plain;
}

inline std::string sanitize_component(std::string s) {
    for (char& c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_'))
            c = '_';
    return s.empty() ? std::string("_") : s;
}

inline nlohmann::json config_echo_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["inputs"] = cfg.inputs;
    j["provider"] = to_string(cfg.sampler.provider);
    j["model"] = cfg.sampler.model_name;
    j["temperature"] = cfg.sampler.temperature;
    j["trials"] = cfg.sampler.trials;
    j["max_retries_per_trial"] = cfg.sampler.max_retries_per_trial;
    j["min_effective_trials"] = cfg.sampler.min_effective_trials;
    j["parallelism"] = cfg.sampler.parallelism;
    j["seed"] = cfg.sampler.seed;
    j["lag_min"] = cfg.nccf.lag_min;
    j["lag_max"] = cfg.nccf.lag_max;
    j["min_overlap"] = cfg.nccf.min_overlap;
    j["centering"] = cfg.nccf.per_overlap_centering ? "per-overlap" : "whole-series";
    j["slope_band"] = cfg.slope_band;
    j["sweep_temperatures"] = cfg.sweep_temperatures;
    j["compare_models"] = cfg.compare_models;
    j["plots"] = cfg.emit_plots;
    j["canonical"] = cfg.canonical;
    if (!cfg.mock_spec_path.empty()) j["mock_spec"] = cfg.mock_spec_path;
    if (!cfg.sampler.cache_dir.empty()) j["cache_dir"] = cfg.sampler.cache_dir;
    if (!cfg.sampler.base_url.empty()) j["base_url"] = cfg.sampler.base_url;
    return j;
}

}  // namespace detail

// Per-utterance view of a sweep: rows are utterances, columns temperatures,
// plus each row's max pairwise deviation of the standardized mean.
struct SweepSummary {
    std::string topic;
    std::string model;
    std::vector<double> temperatures;  // ascending
    struct Row {
        int utterance_index = 0;
        int turn = 0;
        Role role = Role::Teacher;
        std::vector<double> std_means;      // aligned with temperatures
        std::vector<double> std_variances;  // aligned with temperatures
        double max_mean_deviation = 0.0;
    };
    std::vector<Row> rows;
};

inline SweepSummary sweep_summary(const std::vector<nlohmann::json>& reports) {
    if (reports.size() < 2)
        throw PipelineError(PipelineError::Kind::MismatchedReports,
                            "sweep summary needs at least 2 reports");

    struct Point {
        int turn;
        Role role;
        double mean, variance;
    };
    struct Parsed {
        double temperature;
        std::string topic, model;
        std::map<int, Point> by_index;
    };
    std::vector<Parsed> parsed;
    for (const auto& r : reports) {
        Parsed p;
        try {
            p.temperature = r.at("provenance").at("temperature").get<double>();
            p.topic = r.at("topic").get<std::string>();
            p.model = r.at("provenance").at("model").get<std::string>();
            for (const char* role_key : {"teacher", "student"}) {
                for (const auto& e : r.at("trajectories").at(role_key)) {
                    Point pt{e.at("turn").get<int>(),
                             *role_from_string(e.at("role").get<std::string>()),
                             e.at("std_mean").get<double>(), e.at("std_variance").get<double>()};
                    p.by_index[e.at("utterance_index").get<int>()] = pt;
                }
            }
        } catch (const nlohmann::json::exception& e) {
            throw PipelineError(PipelineError::Kind::MismatchedReports,
                                std::string("report missing expected fields: ") + e.what());
        }
        parsed.push_back(std::move(p));
    }
    std::sort(parsed.begin(), parsed.end(),
              [](const Parsed& a, const Parsed& b) { return a.temperature < b.temperature; });

    for (const auto& p : parsed) {
        if (p.topic != parsed.front().topic || p.model != parsed.front().model)
            throw PipelineError(PipelineError::Kind::MismatchedReports,
                                "sweep reports must cover the same dialogue and model");
        if (p.by_index.size() != parsed.front().by_index.size())
            throw PipelineError(PipelineError::Kind::MismatchedReports,
                                "sweep reports cover different utterance sets");
        for (const auto& [index, pt] : p.by_index)
            if (!parsed.front().by_index.count(index))
                throw PipelineError(PipelineError::Kind::MismatchedReports,
                                    "sweep reports cover different utterance sets");
    }
    for (std::size_t i = 1; i < parsed.size(); ++i)
        if (parsed[i].temperature == parsed[i - 1].temperature)
            throw PipelineError(PipelineError::Kind::MismatchedReports,
                                "sweep reports must differ in temperature");

    SweepSummary summary;
    summary.topic = parsed.front().topic;
    summary.model = parsed.front().model;
    for (const auto& p : parsed) summary.temperatures.push_back(p.temperature);
    for (const auto& [index, first_pt] : parsed.front().by_index) {
        SweepSummary::Row row;
        row.utterance_index = index;
        row.turn = first_pt.turn;
        row.role = first_pt.role;
        double lo = 1e300, hi = -1e300;
        for (const auto& p : parsed) {
            const Point& pt = p.by_index.at(index);
            row.std_means.push_back(pt.mean);
            row.std_variances.push_back(pt.variance);
            lo = std::min(lo, pt.mean);
            hi = std::max(hi, pt.mean);
        }
        row.max_mean_deviation = hi - lo;
        summary.rows.push_back(std::move(row));
    }
    return summary;
}

inline nlohmann::json sweep_summary_to_json(const SweepSummary& s) {
    nlohmann::json j;
    j["topic"] = s.topic;
    j["model"] = s.model;
    j["temperatures"] = s.temperatures;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : s.rows) {
        nlohmann::json means = nlohmann::json::object();
        nlohmann::json variances = nlohmann::json::object();
        for (std::size_t i = 0; i < s.temperatures.size(); ++i) {
            means[format_double(s.temperatures[i])] = row.std_means[i];
            variances[format_double(s.temperatures[i])] = row.std_variances[i];
        }
        rows.push_back({{"utterance_index", row.utterance_index},
                        {"turn", row.turn},
                        {"role", to_string(row.role)},
                        {"std_mean", means},
                        {"std_variance", variances},
                        {"max_mean_deviation", row.max_mean_deviation}});
    }
    j["utterances"] = rows;
    return j;
}

inline std::string sweep_summary_csv(const SweepSummary& s) {
    std::string out = "utterance_index,turn,role";
    for (double t : s.temperatures) out += ",mean_tau_" + format_double(t);
    for (double t : s.temperatures) out += ",var_tau_" + format_double(t);
    out += ",max_mean_deviation\n";
    for (const auto& row : s.rows) {
        out += std::to_string(row.utterance_index) + "," + std::to_string(row.turn) + "," +
               to_string(row.role);
        for (double m : row.std_means) out += "," + format_double(m);
        for (double v : row.std_variances) out += "," + format_double(v);
        out += "," + format_double(row.max_mean_deviation) + "\n";
    }
    return out;
}

// Runs the full pipeline for every input x model x temperature combination.
// Failures are isolated per input file; completed work is never discarded.
inline RunManifest run(const RunConfig& cfg) {
    auto started = std::chrono::steady_clock::now();
    if (cfg.inputs.empty())
        throw PipelineError(PipelineError::Kind::Usage, "at least one --input is required");
    if (cfg.sampler.provider == ProviderKind::Mock && cfg.mock_spec_path.empty())
        throw PipelineError(PipelineError::Kind::Usage,
                            "mock provider needs --mock-spec <file>");
    if (cfg.sampler.provider == ProviderKind::Remote && cfg.sampler.base_url.empty())
        throw PipelineError(PipelineError::Kind::Usage, "remote provider needs --base-url");
    for (double t : cfg.sweep_temperatures)
        if (!(t > 0.0 && t <= 2.0))
            throw PipelineError(PipelineError::Kind::Usage,
                                "sweep temperatures must lie in (0, 2]");

    std::string rubric{kRubricText};
    std::string rubric_version{kRubricVersion};
    if (!cfg.rubric_path.empty()) {
        rubric = detail::read_file(cfg.rubric_path);
        rubric_version = "custom:" + std::filesystem::path(cfg.rubric_path).filename().string();
    }
    const std::string rubric_hash_hex = hex64(rubric_hash(rubric));

    std::optional<ResponseCache> cache;
    if (!cfg.sampler.cache_dir.empty()) cache.emplace(cfg.sampler.cache_dir);

    std::vector<double> temperatures =
        cfg.sweep_temperatures.empty() ? std::vector<double>{cfg.sampler.temperature}
                                       : cfg.sweep_temperatures;
    std::vector<std::string> models = cfg.compare_models.empty()
                                          ? std::vector<std::string>{cfg.sampler.model_name}
                                          : cfg.compare_models;

    std::string mock_spec_text;
    if (cfg.sampler.provider == ProviderKind::Mock)
        mock_spec_text = detail::read_file(cfg.mock_spec_path);

    RunManifest manifest;
    manifest.out_dir = cfg.out_dir;
    manifest.rubric_version = rubric_version;
    manifest.rubric_hash_hex = rubric_hash_hex;
    manifest.config_echo = detail::config_echo_json(cfg);
    const std::filesystem::path out_root(cfg.out_dir);
    std::int64_t total_network_calls = 0;

    auto emit = [&](const std::filesystem::path& rel, const std::string& content) {
        detail::write_file_atomic(out_root / rel, content);
        manifest.artifacts.push_back(rel.generic_string());
    };

    for (const auto& input : cfg.inputs) {
        try {
            const std::filesystem::path in_path(input);
            Dialogue full = parse_dialogue(detail::read_file(in_path),
                                           detail::deduce_format(in_path, cfg.format));
            Dialogue d = strip_sentinels(full);
            PromptAssembly prompt = build_prompt(d, rubric);
            const std::string stem = detail::sanitize_component(in_path.stem().string());

            for (const auto& model : models) {
                std::vector<nlohmann::json> sweep_reports;
                for (double temperature : temperatures) {
                    SamplerConfig sampler = cfg.sampler;
                    sampler.model_name = model;
                    sampler.temperature = temperature;

                    TrialBatch batch;
                    if (sampler.provider == ProviderKind::Mock) {
                        MockSpec spec = parse_mock_spec(mock_spec_text, temperature);
                        MockProvider provider(spec);
                        batch = run_trials_with(prompt, sampler, provider,
                                                cache ? &*cache : nullptr);
                    } else {
                        if (!cfg.remote_provider_factory)
                            throw PipelineError(PipelineError::Kind::Usage,
                                                "remote provider factory not configured");
                        auto provider = cfg.remote_provider_factory(sampler);
                        batch = run_trials_with(prompt, sampler, *provider,
                                                cache ? &*cache : nullptr);
                    }
                    total_network_calls += batch.stats.network_calls;
                    if (cfg.canonical) batch.provenance.timestamp.clear();

                    DyadTrajectories trajectories = estimate(batch, d);
                    DyadReport report =
                        analyze(std::move(trajectories), AnalysisOptions{cfg.nccf, cfg.slope_band});

                    ReportMeta meta{sampler.trials, batch.effective_k, batch.dropped,
                                    rubric_version, rubric_hash_hex,  cfg.canonical};
                    nlohmann::json report_json = report_to_json(report, cfg.nccf, meta);

                    std::filesystem::path rel_dir =
                        std::filesystem::path(stem) / detail::sanitize_component(model) /
                        ("tau_" + format_double(temperature));
                    emit(rel_dir / "report.json", report_json.dump(2) + "\n");
                    emit(rel_dir / "trajectories.csv", trajectories_csv(report.trajectories));
                    emit(rel_dir / "correlogram.csv", correlogram_csv(report.correlogram));
                    if (cfg.emit_plots) {
                        emit(rel_dir / "trajectory.svg", trajectory_svg(report.trajectories));
                        emit(rel_dir / "correlogram.svg", correlogram_svg(report.correlogram));
                    }
                    for (int kde_index : cfg.kde_utterances) {
                        KdeProfile profile = kde_profile(batch, kde_index);
                        emit(rel_dir / ("kde_" + std::to_string(kde_index) + ".json"),
                             kde_to_json(profile, kde_index).dump(2) + "\n");
                    }
                    sweep_reports.push_back(std::move(report_json));
                }
                if (temperatures.size() >= 2) {
                    SweepSummary summary = sweep_summary(sweep_reports);
                    std::filesystem::path rel_dir =
                        std::filesystem::path(stem) / detail::sanitize_component(model);
                    emit(rel_dir / "sweep_summary.json", sweep_summary_to_json(summary).dump(2) + "\n");
                    emit(rel_dir / "sweep_summary.csv", sweep_summary_csv(summary));
                }
            }
        } catch (const std::exception& e) {
            manifest.failures.push_back({input, e.what()});
        }
    }

    if (cache) manifest.cache = cache->stats();
    manifest.cache.network_calls = total_network_calls;
    std::sort(manifest.artifacts.begin(), manifest.artifacts.end());
    if (!cfg.canonical)
        manifest.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                               std::chrono::steady_clock::now() - started)
                               .count();

    nlohmann::json mj;
    mj["schema_version"] = kReportSchemaVersion;
    mj["config"] = manifest.config_echo;
    mj["rubric"] = {{"version", manifest.rubric_version}, {"hash", manifest.rubric_hash_hex}};
    mj["cache"] = {{"hits", manifest.cache.hits},
                   {"misses", manifest.cache.misses},
                   {"corrupt", manifest.cache.corrupt},
                   {"network_calls", manifest.cache.network_calls}};
    mj["wall_ms"] = manifest.wall_ms;
    mj["artifacts"] = manifest.artifacts;
    nlohmann::json fails = nlohmann::json::array();
    for (const auto& f : manifest.failures) fails.push_back({{"input", f.input}, {"error", f.error}});
    mj["failures"] = fails;
    detail::write_file_atomic(out_root / "run_manifest.json", mj.dump(2) + "\n");

    return manifest;
}

}  // namespace affect
