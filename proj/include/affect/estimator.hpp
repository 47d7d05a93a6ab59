#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "affect/dialogue.hpp"
#include "affect/error.hpp"
#include "affect/gateway.hpp"

namespace affect {

class EstimatorError : public Error {
public:
    enum class Kind { TooFewTrials, AlignmentError, BadInput };

    EstimatorError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Raw scores map onto [-1, 1]: 0 (most positive rubric score) -> +1,
// 2.5 (neutral) -> 0, 5 (most negative) -> -1.
inline double map_polarity(double raw_score) {
    if (!(raw_score >= 0.0 && raw_score <= 5.0))
        throw EstimatorError(EstimatorError::Kind::BadInput,
                             "raw score outside [0, 5]: " + std::to_string(raw_score));
    return 1.0 - 2.0 * (raw_score / 5.0);
}

// Variances scale by the squared mapping coefficient (2/5)^2.
inline constexpr double kStdVarianceScale = 0.16;

struct AffectEstimate {
    int utterance_index = 0;
    int turn = 0;
    Role role = Role::Teacher;
    double raw_mean = 0.0;
    double raw_variance = 0.0;
    double std_mean = 0.0;
    double std_variance = 0.0;
    int k_used = 0;
};

struct Trajectory {
    Role role = Role::Teacher;
    std::vector<AffectEstimate> points;  // ordered by turn, strictly increasing

    std::size_t length() const { return points.size(); }
};

struct DyadTrajectories {
    Trajectory teacher;
    Trajectory student;
    std::string topic;
    BatchProvenance provenance;
};

// Aggregates the trial scores into per-utterance mean/variance estimates and
// splits them into per-role trajectories ordered by turn.
inline DyadTrajectories estimate(const TrialBatch& batch, const Dialogue& d) {
    const int k = batch.effective_k;
    if (k < 2 || static_cast<int>(batch.trials.size()) < 2)
        throw EstimatorError(EstimatorError::Kind::TooFewTrials,
                             "variance estimation needs at least 2 usable trials, got " +
                                 std::to_string(batch.trials.size()));

    const std::size_t n = d.utterances.size();
    for (const auto& trial : batch.trials) {
        if (trial.lines.size() != n)
            throw EstimatorError(EstimatorError::Kind::AlignmentError,
                                 "trial " + std::to_string(trial.trial_id) + " scores " +
                                     std::to_string(trial.lines.size()) + " utterances, dialogue has " +
                                     std::to_string(n));
        for (std::size_t i = 0; i < n; ++i)
            if (trial.lines[i].index != d.utterances[i].index)
                throw EstimatorError(EstimatorError::Kind::AlignmentError,
                                     "trial " + std::to_string(trial.trial_id) +
                                         " covers different utterance indices than the dialogue");
    }

    DyadTrajectories out;
    out.teacher.role = Role::Teacher;
    out.student.role = Role::Student;
    out.topic = d.topic;
    out.provenance = batch.provenance;

    for (std::size_t i = 0; i < n; ++i) {
        const Utterance& u = d.utterances[i];
        std::int64_t sum_half = 0;
        bool all_equal = true;
        for (const auto& trial : batch.trials) {
            sum_half += trial.lines[i].score;
            if (trial.lines[i].score != batch.trials.front().lines[i].score) all_equal = false;
        }
        AffectEstimate e;
        e.utterance_index = u.index;
        e.turn = u.turn;
        e.role = u.role;
        e.k_used = k;
        e.raw_mean = static_cast<double>(sum_half) / (2.0 * k);
        if (all_equal) {
            e.raw_variance = 0.0;
        } else {
            double ss = 0.0;
            for (const auto& trial : batch.trials) {
                double dev = half_units_to_score(trial.lines[i].score) - e.raw_mean;
                ss += dev * dev;
            }
            e.raw_variance = ss / (k - 1);
        }
        e.std_mean = map_polarity(e.raw_mean);
        e.std_variance = kStdVarianceScale * e.raw_variance;
        (u.role == Role::Teacher ? out.teacher : out.student).points.push_back(e);
    }

    auto check_turns = [](const Trajectory& t) {
        for (std::size_t i = 1; i < t.points.size(); ++i)
            if (t.points[i].turn <= t.points[i - 1].turn)
                throw EstimatorError(EstimatorError::Kind::BadInput,
                                     "trajectory turns must be strictly increasing");
    };
    check_turns(out.teacher);
    check_turns(out.student);
    auto diff = static_cast<std::int64_t>(out.teacher.length()) -
                static_cast<std::int64_t>(out.student.length());
    if (diff < -1 || diff > 1)
        throw EstimatorError(EstimatorError::Kind::BadInput,
                             "per-role series lengths differ by more than one turn");
    return out;
}

struct KdeProfile {
    bool point_mass = false;
    double location = 0.0;  // set when point_mass
    double bandwidth = 0.0;
    int n_samples = 0;
    std::vector<double> grid;
    std::vector<double> density;
};

inline constexpr double kKdeBandwidthFloor = 0.02;

namespace detail {

inline double interpolated_quantile(std::vector<double> sorted, double p) {
    double pos = p * (static_cast<double>(sorted.size()) - 1.0);
    auto lo = static_cast<std::size_t>(pos);
    auto hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace detail

// Silverman's rule on the sample, floored so one dominant grid score cannot
// collapse the bandwidth to zero.
inline double silverman_bandwidth(const std::vector<double>& samples) {
    const auto n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / (n - 1.0));

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    double iqr = detail::interpolated_quantile(sorted, 0.75) -
                 detail::interpolated_quantile(sorted, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    double h = 0.9 * spread * std::pow(n, -0.2);
    return std::max(h, kKdeBandwidthFloor);
}

// Gaussian-kernel density of the standardized trial scores for one utterance.
// Degenerate samples are flagged as point masses instead of a zero-bandwidth
// density.
inline KdeProfile kde_profile(const TrialBatch& batch, int utterance_index,
                              const std::vector<double>& grid) {
    if (batch.trials.size() < 2)
        throw EstimatorError(EstimatorError::Kind::TooFewTrials,
                             "KDE needs at least 2 trials");
    if (grid.size() < 2 || grid.front() > -1.0 || grid.back() < 1.0)
        throw EstimatorError(EstimatorError::Kind::BadInput,
                             "KDE grid must be increasing and span [-1, 1]");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1])
            throw EstimatorError(EstimatorError::Kind::BadInput,
                                 "KDE grid must be strictly increasing");

    std::vector<double> samples;
    samples.reserve(batch.trials.size());
    for (const auto& trial : batch.trials) {
        const ScoredLine* found = nullptr;
        for (const auto& line : trial.lines)
            if (line.index == utterance_index) {
                found = &line;
                break;
            }
        if (found == nullptr)
            throw EstimatorError(EstimatorError::Kind::AlignmentError,
                                 "utterance " + std::to_string(utterance_index) +
                                     " not scored in trial " + std::to_string(trial.trial_id));
        samples.push_back(map_polarity(half_units_to_score(found->score)));
    }

    KdeProfile profile;
    profile.n_samples = static_cast<int>(samples.size());
    bool all_equal = std::all_of(samples.begin(), samples.end(),
                                 [&](double x) { return x == samples.front(); });
    if (all_equal) {
        profile.point_mass = true;
        profile.location = samples.front();
        return profile;
    }

    profile.bandwidth = silverman_bandwidth(samples);
    profile.grid = grid;
    profile.density.resize(grid.size());
    const double h = profile.bandwidth;
    const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * M_PI));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double acc = 0.0;
        for (double x : samples) {
            double z = (grid[g] - x) / h;
            acc += std::exp(-0.5 * z * z);
        }
        profile.density[g] = norm * acc;
    }
    return profile;
}

// Uniform grid wide enough that the kernel mass inside is 1 to within the
// integration tolerance: [-1, 1] extended by five bandwidths each side.
inline std::vector<double> default_kde_grid(double bandwidth, std::size_t points = 601) {
    double lo = -1.0 - 5.0 * bandwidth;
    double hi = 1.0 + 5.0 * bandwidth;
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return grid;
}

// Grid-free variant: sizes the default grid from the sample's own bandwidth.
inline KdeProfile kde_profile(const TrialBatch& batch, int utterance_index) {
    KdeProfile probe = kde_profile(batch, utterance_index, default_kde_grid(1.0));
    if (probe.point_mass) return probe;
    return kde_profile(batch, utterance_index, default_kde_grid(probe.bandwidth));
}

}  // namespace affect
