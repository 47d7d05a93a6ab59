#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "affect/error.hpp"
#include "affect/format.hpp"
#include "affect/hash.hpp"
#include "affect/mock.hpp"
#include "affect/prompt.hpp"

namespace affect {

enum class ProviderKind { Remote, Mock };

inline const char* to_string(ProviderKind k) { return k == ProviderKind::Remote ? "remote" : "mock"; }

struct SamplerConfig {
    ProviderKind provider = ProviderKind::Mock;
    std::string model_name = "mock-model";
    double temperature = 0.7;
    int trials = 20;                // K
    int max_retries_per_trial = 3;
    int min_effective_trials = 10;  // K_min
    int parallelism = 4;
    double timeout_seconds = 60.0;
    std::string base_url;          // remote only
    std::uint64_t seed = 0;        // mock only
    bool allow_zero_temperature = false;
    std::string cache_dir;         // empty disables the response cache
};

struct TrialError {
    enum class Kind { Parse, Transport, BadResponse };

    int trial_id = 0;
    int attempt = 0;
    Kind kind = Kind::Parse;
    std::string message;
};

class GatewayError : public Error {
public:
    enum class Kind { BadConfig, InsufficientTrials, AuthError, TransportError };

    GatewayError(Kind kind, const std::string& what, std::vector<TrialError> log = {})
        : Error(what), kind_(kind), log_(std::move(log)) {}

    Kind kind() const { return kind_; }
    const std::vector<TrialError>& log() const { return log_; }

private:
    Kind kind_;
    std::vector<TrialError> log_;
};

inline void validate_sampler_config(const SamplerConfig& cfg) {
    using Kind = GatewayError::Kind;
    if (cfg.min_effective_trials < 2)
        throw GatewayError(Kind::BadConfig, "min_effective_trials must be at least 2");
    if (cfg.trials < cfg.min_effective_trials)
        throw GatewayError(Kind::BadConfig, "trials must be >= min_effective_trials");
    if (cfg.temperature < 0.0 || cfg.temperature > 2.0)
        throw GatewayError(Kind::BadConfig, "temperature must lie in (0, 2]");
    if (cfg.temperature == 0.0 && !cfg.allow_zero_temperature)
        throw GatewayError(Kind::BadConfig,
                           "temperature 0 collapses the sampling distribution; pass the explicit "
                           "zero-temperature override to proceed");
    if (cfg.max_retries_per_trial < 0)
        throw GatewayError(Kind::BadConfig, "max_retries_per_trial must be non-negative");
    if (cfg.parallelism < 1) throw GatewayError(Kind::BadConfig, "parallelism must be positive");
    if (cfg.timeout_seconds <= 0.0) throw GatewayError(Kind::BadConfig, "timeout must be positive");
    if (cfg.provider == ProviderKind::Remote && cfg.base_url.empty())
        throw GatewayError(Kind::BadConfig, "remote provider needs a base_url");
}

struct BatchProvenance {
    std::string provider;
    std::string model_name;
    double temperature = 0.0;
    std::uint64_t prompt_hash = 0;
    std::uint64_t seed = 0;
    std::string timestamp;  // ISO-8601 UTC; left empty in canonical output
};

struct CacheStats {
    std::int64_t hits = 0;
    std::int64_t misses = 0;
    std::int64_t corrupt = 0;
    std::int64_t network_calls = 0;
};

struct TrialBatch {
    std::vector<TrialResult> trials;  // ordered by trial_id
    int effective_k = 0;
    int dropped = 0;
    BatchProvenance provenance;
    CacheStats stats;
    std::vector<TrialError> error_log;
};

// One independent decoding attempt. Implementations throw ProviderFailure on
// anything that is not a usable response body.
class Provider {
public:
    struct Request {
        const PromptAssembly& prompt;
        const SamplerConfig& config;
        int trial_id = 0;
    };

    virtual ~Provider() = default;
    virtual std::string complete(const Request& request) = 0;
    // Remote responses are cached; deterministic local providers are not,
    // since the cache key has no slot for their seed or spec.
    virtual bool cacheable() const { return false; }
};

class ProviderFailure : public Error {
public:
    enum class Kind { Transport, Auth, BadResponse };

    ProviderFailure(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class MockProvider : public Provider {
public:
    explicit MockProvider(MockSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

    std::string complete(const Request& request) override {
        return mock_response(spec_, request.prompt.dialogue, request.config.seed,
                             request.trial_id);
    }

private:
    MockSpec spec_;
};

struct CacheKey {
    std::uint64_t content_hash = 0;
    std::string model_name;
    double temperature = 0.0;
    int trial_id = 0;

    std::string serialize() const {
        return hex64(content_hash) + "|" + model_name + "|" + format_double(temperature) + "|" +
               std::to_string(trial_id);
    }

    std::string filename() const { return hex64(fnv1a64(serialize())) + ".resp"; }
};

// One file per (content_hash, model, temperature, trial_id): a JSON header
// line recording the key fields, then the raw response bytes.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    std::optional<std::string> lookup(const CacheKey& key) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto path = dir_ / key.filename();
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            ++stats_.misses;
            return std::nullopt;
        }
        std::string header;
        if (!std::getline(in, header)) return corrupt();
        nlohmann::json h;
        try {
            h = nlohmann::json::parse(header);
        } catch (const nlohmann::json::exception&) {
            return corrupt();
        }
        if (h.value("key", std::string{}) != key.serialize()) return corrupt();
        std::ostringstream body;
        body << in.rdbuf();
        std::string raw = body.str();
        if (!h.contains("bytes") || !h["bytes"].is_number_integer() ||
            h["bytes"].get<std::int64_t>() != static_cast<std::int64_t>(raw.size()))
            return corrupt();
        ++stats_.hits;
        return raw;
    }

    void store(const CacheKey& key, const std::string& raw) {
        std::lock_guard<std::mutex> lock(mutex_);
        nlohmann::json h;
        h["key"] = key.serialize();
        h["content_hash"] = hex64(key.content_hash);
        h["model"] = key.model_name;
        h["temperature"] = key.temperature;
        h["trial_id"] = key.trial_id;
        h["bytes"] = static_cast<std::int64_t>(raw.size());
        auto path = dir_ / key.filename();
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out << h.dump() << "\n" << raw;
        }
        std::filesystem::rename(tmp, path);
    }

    CacheStats stats() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return stats_;
    }

private:
    std::optional<std::string> corrupt() {
        ++stats_.corrupt;
        ++stats_.misses;
        return std::nullopt;
    }

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    CacheStats stats_;
};

namespace detail {

inline std::string iso8601_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", &tm);
    return buf;
}

}  // namespace detail

// Executes up to K independent trials against `provider`, with per-trial
// retries and bounded parallelism. The result is deterministic for a
// deterministic provider: trial k's draws never depend on scheduling.
inline TrialBatch run_trials_with(const PromptAssembly& prompt, const SamplerConfig& cfg,
                                  Provider& provider, ResponseCache* cache = nullptr) {
    validate_sampler_config(cfg);
    const int k_requested = cfg.trials;
    const bool use_cache = cache != nullptr && provider.cacheable();

    std::vector<std::optional<TrialResult>> slots(static_cast<std::size_t>(k_requested));
    std::vector<TrialError> error_log;
    std::optional<GatewayError> fatal;
    std::mutex log_mutex;
    std::atomic<int> next_trial{0};
    std::atomic<std::int64_t> network_calls{0};
    std::atomic<bool> abort{false};

    auto worker = [&] {
        for (;;) {
            if (abort.load()) return;
            int trial_id = next_trial.fetch_add(1);
            if (trial_id >= k_requested) return;
            CacheKey key{prompt.content_hash, cfg.model_name, cfg.temperature, trial_id};
            bool tried_cache = false;
            for (int attempt = 0; attempt <= cfg.max_retries_per_trial; ++attempt) {
                if (abort.load()) return;
                std::string raw;
                bool from_cache = false;
                try {
                    if (use_cache && !tried_cache) {
                        tried_cache = true;
                        if (auto hit = cache->lookup(key)) {
                            raw = std::move(*hit);
                            from_cache = true;
                        }
                    }
                    if (!from_cache) {
                        Provider::Request request{prompt, cfg, trial_id};
                        network_calls.fetch_add(1);
                        raw = provider.complete(request);
                        if (use_cache) cache->store(key, raw);
                    }
                    TrialResult trial = parse_trial(raw, prompt.dialogue, trial_id);
                    slots[static_cast<std::size_t>(trial_id)] = std::move(trial);
                    break;
                } catch (const ProviderFailure& e) {
                    if (e.kind() == ProviderFailure::Kind::Auth) {
                        std::lock_guard<std::mutex> lock(log_mutex);
                        if (!fatal)
                            fatal = GatewayError(GatewayError::Kind::AuthError, e.what());
                        abort.store(true);
                        return;
                    }
                    auto kind = e.kind() == ProviderFailure::Kind::Transport
                                    ? TrialError::Kind::Transport
                                    : TrialError::Kind::BadResponse;
                    std::lock_guard<std::mutex> lock(log_mutex);
                    error_log.push_back({trial_id, attempt, kind, e.what()});
                } catch (const TrialParseError& e) {
                    std::lock_guard<std::mutex> lock(log_mutex);
                    error_log.push_back({trial_id, attempt, TrialError::Kind::Parse, e.what()});
                }
            }
        }
    };

    int n_workers = std::min(cfg.parallelism, k_requested);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    if (fatal) throw *fatal;

    TrialBatch batch;
    for (auto& slot : slots)
        if (slot) batch.trials.push_back(std::move(*slot));
    batch.effective_k = static_cast<int>(batch.trials.size());
    batch.dropped = k_requested - batch.effective_k;
    batch.provenance = BatchProvenance{to_string(cfg.provider), cfg.model_name, cfg.temperature,
                                       prompt.content_hash,     cfg.seed,       detail::iso8601_utc_now()};
    if (cache != nullptr) batch.stats = cache->stats();
    batch.stats.network_calls = network_calls.load();
    batch.error_log = std::move(error_log);

    if (batch.effective_k < cfg.min_effective_trials) {
        bool all_transport = !batch.error_log.empty();
        for (const auto& e : batch.error_log)
            if (e.kind != TrialError::Kind::Transport) all_transport = false;
        auto kind = all_transport ? GatewayError::Kind::TransportError
                                  : GatewayError::Kind::InsufficientTrials;
        throw GatewayError(kind,
                           "only " + std::to_string(batch.effective_k) + " of " +
                               std::to_string(k_requested) + " trials usable (minimum " +
                               std::to_string(cfg.min_effective_trials) + ")",
                           batch.error_log);
    }
    return batch;
}

inline TrialBatch run_trials(const PromptAssembly& prompt, const SamplerConfig& cfg,
                             const std::optional<MockSpec>& mock = std::nullopt,
                             ResponseCache* cache = nullptr) {
    validate_sampler_config(cfg);
    if (cfg.provider == ProviderKind::Mock) {
        if (!mock)
            throw GatewayError(GatewayError::Kind::BadConfig,
                               "mock provider needs a mock spec");
        MockProvider provider(*mock);
        return run_trials_with(prompt, cfg, provider, cache);
    }
    throw GatewayError(GatewayError::Kind::BadConfig,
                       "remote provider requires an HTTP provider instance; use "
                       "run_trials_with with HttpProvider");
}

}  // namespace affect
