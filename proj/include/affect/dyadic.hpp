#pragma once

#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "affect/error.hpp"
#include "affect/estimator.hpp"

namespace affect {

class AnalysisError : public Error {
public:
    enum class Kind { Infeasible, BadInput };

    AnalysisError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct LagEntry {
    int lag = 0;
    int overlap = 0;
    std::optional<double> r;  // empty when overlap or variance is insufficient

    bool defined() const { return r.has_value(); }
};

struct Correlogram {
    int lag_min = -3;
    int lag_max = 3;
    std::vector<LagEntry> entries;  // one per lag, ascending
    int optimal_lag = 0;
    double optimal_r = 0.0;

    const LagEntry& at(int lag) const {
        return entries.at(static_cast<std::size_t>(lag - lag_min));
    }
};

struct SlopeIndicator {
    Role role = Role::Teacher;
    double beta = 0.0;
    int n_points = 0;
    double mean_turn = 0.0;
    double mean_value = 0.0;
};

struct NccfOptions {
    int lag_min = -3;
    int lag_max = 3;
    int min_overlap = 3;
    // The equation centers each series on its whole-series mean; per-overlap
    // centering is available for sensitivity checks only.
    bool per_overlap_centering = false;
};

namespace detail {

// argmax |r| with ties broken toward the smaller |lag|, and toward the
// positive lag between +L and -L. Iterating lags in preference order with a
// strict comparison implements exactly that.
inline std::pair<int, double> pick_optimal_lag(const std::vector<LagEntry>& entries) {
    std::vector<int> order;
    int max_abs = 0;
    for (const auto& e : entries) max_abs = std::max(max_abs, std::abs(e.lag));
    for (int a = 0; a <= max_abs; ++a) {
        order.push_back(a);
        if (a != 0) order.push_back(-a);
    }
    bool found = false;
    int best_lag = 0;
    double best_r = 0.0;
    for (int lag : order) {
        for (const auto& e : entries) {
            if (e.lag != lag || !e.defined()) continue;
            if (!found || std::abs(*e.r) > std::abs(best_r)) {
                found = true;
                best_lag = lag;
                best_r = *e.r;
            }
        }
    }
    if (!found)
        throw AnalysisError(AnalysisError::Kind::Infeasible,
                            "no lag has enough overlapping, non-constant data");
    return {best_lag, best_r};
}

inline std::map<int, double> by_turn(const Trajectory& t) {
    std::map<int, double> m;
    for (const auto& p : t.points) m[p.turn] = p.std_mean;
    return m;
}

inline double series_mean(const std::map<int, double>& m) {
    double s = 0.0;
    for (const auto& [turn, v] : m) s += v;
    return s / static_cast<double>(m.size());
}

}  // namespace detail

// Normalized cross-correlation across conversational lags. A positive lag
// pairs the teacher's value at turn t+L with the student's at turn t, the
// orientation under which the teacher-led exchanges in the bundled fixtures
// surface at L > 0.
inline Correlogram nccf(const Trajectory& teacher, const Trajectory& student,
                        NccfOptions opts = {}) {
    if (teacher.points.empty() || student.points.empty())
        throw AnalysisError(AnalysisError::Kind::BadInput, "both trajectories must be non-empty");
    if (opts.lag_min > 0 || opts.lag_max < 0 || opts.lag_min > opts.lag_max)
        throw AnalysisError(AnalysisError::Kind::BadInput, "lag range must contain 0");
    if (opts.min_overlap < 2)
        throw AnalysisError(AnalysisError::Kind::BadInput, "min_overlap must be at least 2");

    auto t_by_turn = detail::by_turn(teacher);
    auto s_by_turn = detail::by_turn(student);
    const double t_mean = detail::series_mean(t_by_turn);
    const double s_mean = detail::series_mean(s_by_turn);

    Correlogram gram;
    gram.lag_min = opts.lag_min;
    gram.lag_max = opts.lag_max;
    for (int lag = opts.lag_min; lag <= opts.lag_max; ++lag) {
        LagEntry entry;
        entry.lag = lag;
        std::vector<std::pair<double, double>> pairs;
        for (const auto& [turn, s_value] : s_by_turn) {
            auto it = t_by_turn.find(turn + lag);
            if (it != t_by_turn.end()) pairs.emplace_back(it->second, s_value);
        }
        entry.overlap = static_cast<int>(pairs.size());
        if (entry.overlap >= opts.min_overlap) {
            double ct = t_mean, cs = s_mean;
            if (opts.per_overlap_centering) {
                ct = cs = 0.0;
                for (const auto& [tv, sv] : pairs) {
                    ct += tv;
                    cs += sv;
                }
                ct /= entry.overlap;
                cs /= entry.overlap;
            }
            double num = 0.0, den_t = 0.0, den_s = 0.0;
            for (const auto& [tv, sv] : pairs) {
                num += (tv - ct) * (sv - cs);
                den_t += (tv - ct) * (tv - ct);
                den_s += (sv - cs) * (sv - cs);
            }
            if (den_t > 0.0 && den_s > 0.0) entry.r = num / std::sqrt(den_t * den_s);
        }
        gram.entries.push_back(entry);
    }

    auto [best_lag, best_r] = detail::pick_optimal_lag(gram.entries);
    gram.optimal_lag = best_lag;
    gram.optimal_r = best_r;
    return gram;
}

// Least-squares trend of the standardized means over turn numbers.
inline SlopeIndicator slope(const Trajectory& traj) {
    const auto& pts = traj.points;
    if (pts.size() < 2)
        throw AnalysisError(AnalysisError::Kind::BadInput,
                            "slope needs at least 2 trajectory points");
    double t_mean = 0.0, v_mean = 0.0;
    for (const auto& p : pts) {
        t_mean += p.turn;
        v_mean += p.std_mean;
    }
    t_mean /= static_cast<double>(pts.size());
    v_mean /= static_cast<double>(pts.size());
    double num = 0.0, den = 0.0;
    for (const auto& p : pts) {
        num += (p.turn - t_mean) * (p.std_mean - v_mean);
        den += (p.turn - t_mean) * (p.turn - t_mean);
    }
    if (den == 0.0)
        throw AnalysisError(AnalysisError::Kind::BadInput, "all trajectory turns are identical");
    SlopeIndicator s;
    s.role = traj.role;
    s.beta = num / den;
    s.n_points = static_cast<int>(pts.size());
    s.mean_turn = t_mean;
    s.mean_value = v_mean;
    return s;
}

enum class Typology {
    EffectiveScaffolding,
    NegativeContagion,
    UnreciprocatedSupport,
    StudentDrivenSuccess,
    FeedbackBurnout,
    AdaptiveBalancing,
    AffectiveSynchrony,
    SharedFatigue,
    DynamicCompensation,
    Unclassified,
};

inline const char* to_string(Typology t) {
    switch (t) {
        case Typology::EffectiveScaffolding: return "Effective Scaffolding";
        case Typology::NegativeContagion: return "Negative Contagion";
        case Typology::UnreciprocatedSupport: return "Unreciprocated Support";
        case Typology::StudentDrivenSuccess: return "Student-driven Success";
        case Typology::FeedbackBurnout: return "Feedback Burnout";
        case Typology::AdaptiveBalancing: return "Adaptive Balancing";
        case Typology::AffectiveSynchrony: return "Affective Synchrony";
        case Typology::SharedFatigue: return "Shared Fatigue";
        case Typology::DynamicCompensation: return "Dynamic Compensation";
        case Typology::Unclassified: return "Unclassified";
    }
    return "Unclassified";
}

inline constexpr double kDefaultSlopeBand = 0.01;

// Joint-indicator classification. Slopes within the dead band count as flat,
// and flat slopes match no named pattern. Total over all inputs.
inline Typology classify(int optimal_lag, double optimal_r, double beta_teacher,
                         double beta_student, double slope_band = kDefaultSlopeBand) {
    if (!std::isfinite(optimal_r) || !std::isfinite(beta_teacher) || !std::isfinite(beta_student))
        return Typology::Unclassified;
    if (optimal_r == 0.0) return Typology::Unclassified;
    const bool r_pos = optimal_r > 0.0;
    auto sign_of = [slope_band](double beta) {
        return beta > slope_band ? +1 : beta < -slope_band ? -1 : 0;
    };
    const int bt = sign_of(beta_teacher);
    const int bs = sign_of(beta_student);

    if (optimal_lag > 0) {
        if (r_pos && bt > 0 && bs > 0) return Typology::EffectiveScaffolding;
        if (r_pos && bt < 0 && bs < 0) return Typology::NegativeContagion;
        if (!r_pos && bt > 0 && bs < 0) return Typology::UnreciprocatedSupport;
    } else if (optimal_lag < 0) {
        if (r_pos && bt > 0 && bs > 0) return Typology::StudentDrivenSuccess;
        if (r_pos && bt < 0 && bs < 0) return Typology::FeedbackBurnout;
        if (!r_pos && bt > 0 && bs < 0) return Typology::AdaptiveBalancing;
    } else {
        if (r_pos && bt > 0 && bs > 0) return Typology::AffectiveSynchrony;
        if (r_pos && bt < 0 && bs < 0) return Typology::SharedFatigue;
        if (!r_pos && bt != 0 && bs != 0 && bt != bs) return Typology::DynamicCompensation;
    }
    return Typology::Unclassified;
}

struct AnalysisOptions {
    NccfOptions nccf;
    double slope_band = kDefaultSlopeBand;
};

struct DyadReport {
    DyadTrajectories trajectories;
    Correlogram correlogram;
    SlopeIndicator slope_teacher;
    SlopeIndicator slope_student;
    Typology typology = Typology::Unclassified;
    double slope_band = kDefaultSlopeBand;
};

inline DyadReport analyze(DyadTrajectories trajectories, const AnalysisOptions& opts = {}) {
    DyadReport report;
    report.correlogram = nccf(trajectories.teacher, trajectories.student, opts.nccf);
    report.slope_teacher = slope(trajectories.teacher);
    report.slope_student = slope(trajectories.student);
    report.typology = classify(report.correlogram.optimal_lag, report.correlogram.optimal_r,
                               report.slope_teacher.beta, report.slope_student.beta,
                               opts.slope_band);
    report.slope_band = opts.slope_band;
    report.trajectories = std::move(trajectories);
    return report;
}

}  // namespace affect
