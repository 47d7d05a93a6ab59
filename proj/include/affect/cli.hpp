#pragma once

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "affect/http_provider.hpp"
#include "affect/pipeline.hpp"

namespace affect::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartialFailure = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline bool parse_lag_range(const std::string& text, int& lag_min, int& lag_max) {
    auto colon = text.find(':');
    if (colon == std::string::npos) return false;
    try {
        lag_min = std::stoi(text.substr(0, colon));
        lag_max = std::stoi(text.substr(colon + 1));
    } catch (...) {
        return false;
    }
    return true;
}

}  // namespace detail

inline int run_main(int argc, const char* const* argv) {
    CLI::App app{"Monte Carlo affect trajectories and dyadic dynamics for two-speaker dialogues"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string provider = "mock";
    std::string lag_range;
    std::string format;

    auto* analyze = app.add_subcommand("analyze", "score dialogues and derive dyadic indicators");
    analyze->add_option("--input", cfg.inputs, "dialogue file(s), JSON or plain text")
        ->required()
        ->expected(-1);
    analyze->add_option("--provider", provider, "scoring provider")
        ->check(CLI::IsMember({"remote", "mock"}))
        ->capture_default_str();
    analyze->add_option("--model", cfg.sampler.model_name, "model name")->capture_default_str();
    analyze->add_option("--temperature", cfg.sampler.temperature, "decoding temperature")
        ->capture_default_str();
    analyze->add_option("--trials", cfg.sampler.trials, "independent trials per dialogue (K)")
        ->capture_default_str();
    analyze->add_option("--retries", cfg.sampler.max_retries_per_trial, "retries per failed trial")
        ->capture_default_str();
    analyze
        ->add_option("--min-trials", cfg.sampler.min_effective_trials,
                     "minimum usable trials before the run fails")
        ->capture_default_str();
    analyze->add_option("--parallelism", cfg.sampler.parallelism, "concurrent trial requests")
        ->capture_default_str();
    analyze->add_option("--timeout", cfg.sampler.timeout_seconds, "per-request timeout, seconds")
        ->capture_default_str();
    analyze->add_option("--base-url", cfg.sampler.base_url,
                        "chat-completions endpoint root (remote provider)");
    analyze->add_option("--seed", cfg.sampler.seed, "mock provider seed")->capture_default_str();
    analyze->add_option("--mock-spec", cfg.mock_spec_path,
                        "mock score distributions, JSON (mock provider)");
    analyze->add_option("--cache-dir", cfg.sampler.cache_dir, "response cache directory");
    analyze->add_option("--lag-range", lag_range, "correlogram lag window, min:max (default -3:3)");
    analyze->add_option("--min-overlap", cfg.nccf.min_overlap,
                        "minimum overlapping turns per lag")
        ->capture_default_str();
    analyze->add_option("--slope-band", cfg.slope_band,
                        "dead band for slope sign classification")
        ->capture_default_str();
    analyze->add_flag("--per-overlap-centering", cfg.nccf.per_overlap_centering,
                      "center each lag on its overlap instead of the whole series");
    analyze->add_option("--sweep", cfg.sweep_temperatures,
                        "comma-separated temperatures to sweep")
        ->delimiter(',');
    analyze->add_option("--compare-models", cfg.compare_models,
                        "comma-separated model names to compare")
        ->delimiter(',');
    analyze->add_option("--kde-utterance", cfg.kde_utterances,
                        "emit a score-density profile for these utterance indices")
        ->delimiter(',');
    analyze->add_option("--rubric", cfg.rubric_path, "substitute rubric text file");
    analyze->add_option("--format", format, "force input format")
        ->check(CLI::IsMember({"json", "plain"}));
    analyze->add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
    analyze->add_flag("--plots", cfg.emit_plots, "emit trajectory and correlogram SVGs");
    analyze->add_flag("--canonical", cfg.canonical,
                      "omit timestamps and wall time for byte-stable output");
    analyze->add_flag("--allow-zero-temperature", cfg.sampler.allow_zero_temperature,
                      "permit temperature 0 (collapses the sampling distribution)");

    std::vector<std::string> summary_inputs;
    std::string summary_out = "sweep_summary";
    auto* summarize =
        app.add_subcommand("sweep-summary", "tabulate per-utterance stats across sweep reports");
    summarize->add_option("reports", summary_inputs, "report.json files from one sweep")
        ->required()
        ->expected(-1);
    summarize->add_option("--out", summary_out, "output basename (.json/.csv appended)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (analyze->parsed()) {
            cfg.sampler.provider =
                provider == "remote" ? ProviderKind::Remote : ProviderKind::Mock;
            if (!lag_range.empty() &&
                !detail::parse_lag_range(lag_range, cfg.nccf.lag_min, cfg.nccf.lag_max)) {
                std::cerr << "error: --lag-range expects <min>:<max>\n";
                return kExitUsage;
            }
            if (!format.empty())
                cfg.format = format == "json" ? DialogueFormat::Json : DialogueFormat::Plain;
            cfg.remote_provider_factory = [](const SamplerConfig& sampler) {
                return std::unique_ptr<Provider>(new HttpProvider(sampler.base_url));
            };

            RunManifest manifest = run(cfg);
            for (const auto& f : manifest.failures)
                std::cerr << "error: " << f.input << ": " << f.error << "\n";
            std::cout << manifest.artifacts.size() << " artifact(s) under " << manifest.out_dir
                      << (manifest.failures.empty()
                              ? ""
                              : (", " + std::to_string(manifest.failures.size()) + " input(s) failed"))
                      << "\n";
            return manifest.failures.empty() ? kExitOk : kExitPartialFailure;
        }

        std::vector<nlohmann::json> reports;
        for (const auto& path : summary_inputs)
            reports.push_back(nlohmann::json::parse(affect::detail::read_file(path)));
        SweepSummary summary = sweep_summary(reports);
        affect::detail::write_file_atomic(summary_out + ".json",
                                          sweep_summary_to_json(summary).dump(2) + "\n");
        affect::detail::write_file_atomic(summary_out + ".csv", sweep_summary_csv(summary));
        std::cout << summary_out << ".json and " << summary_out << ".csv written\n";
        return kExitOk;
    } catch (const PipelineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == PipelineError::Kind::Usage ? kExitUsage : kExitPartialFailure;
    } catch (const GatewayError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == GatewayError::Kind::BadConfig ? kExitUsage : kExitPartialFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartialFailure;
    }
}

}  // namespace affect::cli
