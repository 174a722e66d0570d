#include "beamsched/smc.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "beamsched/rng.hpp"

namespace beamsched {
namespace {

using Clock = std::chrono::steady_clock;

struct BudgetWatch {
    std::optional<Clock::time_point> deadline;
    CancelToken cancel;

    // Checked once per simulated step; keeps cancellation within one dt of work.
    bool expired() const {
        if (cancel.cancelled()) return true;
        return deadline && Clock::now() >= *deadline;
    }

    bool any() const { return deadline.has_value() || cancel.cancelled(); }
};

BudgetWatch make_watch(const SmcConfig& smc, const RunBudget& budget) {
    BudgetWatch watch;
    watch.cancel = budget.cancel;
    if (budget.deadline) {
        watch.deadline = budget.deadline;
    } else if (smc.deadline_ms) {
        watch.deadline =
            Clock::now() + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double, std::milli>(*smc.deadline_ms));
    }
    return watch;
}

void validate_smc(const SmcConfig& smc) {
    if (!(smc.epsilon > 0.0 && smc.epsilon < 0.5))
        throw std::invalid_argument("smc: epsilon must be in (0, 0.5)");
    if (!(smc.delta > 0.0 && smc.delta < 1.0))
        throw std::invalid_argument("smc: delta must be in (0, 1)");
}

// One run of the invariant property; true when every step stays in bounds.
bool run_invariant(const MotionModel1D& model, const PerturbationConfig& cfg,
                   const InvariantQuery& q, std::uint64_t run_seed,
                   const BudgetWatch& watch, bool& aborted) {
    MotionStepper stepper(model, cfg, run_seed);
    for (long i = 0;; ++i) {
        const double t = static_cast<double>(i) * model.dt_ms;
        if (t > q.scope_ms) break;
        if (watch.expired()) {
            aborted = true;
            return false;
        }
        const double x = stepper.position(t);
        if (x < q.lower_mm || x > q.upper_mm) return false;
    }
    return true;
}

bool run_reach_box(const MotionModel1D& model, const PerturbationConfig& cfg,
                   const ReachBoxQuery& q, std::uint64_t run_seed,
                   const BudgetWatch& watch, bool& aborted) {
    MotionStepper stepper(model, cfg, run_seed);
    const double end = std::min(q.horizon_ms, q.t_hi_ms);
    for (long i = 0;; ++i) {
        const double t = static_cast<double>(i) * model.dt_ms;
        if (t > end) break;
        if (watch.expired()) {
            aborted = true;
            return false;
        }
        const double x = stepper.position(t);
        if (t >= q.t_lo_ms && t <= q.t_hi_ms && x >= q.x_lo_mm && x <= q.x_hi_mm)
            return true;
    }
    return false;
}

template <typename RunFn>
ProbabilityEstimate estimate(const SmcConfig& smc, const RunBudget& budget,
                             const PerturbationConfig& cfg, std::uint64_t seed,
                             RunFn&& one_run) {
    validate_smc(smc);
    const int total = smc.run_count();
    const BudgetWatch watch = make_watch(smc, budget);
    ProbabilityEstimate est;

    // A run of a zero-rate configuration is the same trajectory for every
    // seed, so a single run decides the estimate exactly.
    if (cfg.deterministic() && !smc.force_full_sampling) {
        bool aborted = false;
        const bool sat = one_run(seed_for(seed, 0), watch, aborted);
        if (aborted) {
            est.completed = false;
            est.runs_used = 0;
            est.p_hat = 0.0;
            return est;
        }
        est.p_hat = sat ? 1.0 : 0.0;
        est.runs_used = 1;
        est.completed = true;
        return est;
    }

    int sat = 0;
    int done = 0;
    for (int r = 0; r < total; ++r) {
        bool aborted = false;
        const bool ok = one_run(seed_for(seed, static_cast<std::uint64_t>(r)),
                                watch, aborted);
        if (aborted) {
            est.completed = false;
            break;
        }
        sat += ok ? 1 : 0;
        ++done;
    }
    est.runs_used = done;
    est.p_hat = done > 0 ? static_cast<double>(sat) / static_cast<double>(done) : 0.0;
    return est;
}

} // namespace

ProbabilityEstimate check_invariant(const MotionModel1D& model,
                                    const PerturbationConfig& cfg,
                                    const InvariantQuery& query,
                                    const SmcConfig& smc, std::uint64_t seed,
                                    const RunBudget& budget) {
    model.validate();
    if (!(query.scope_ms > 0.0))
        throw std::invalid_argument("invariant query: scope must be > 0");
    if (query.lower_mm > query.upper_mm)
        throw std::invalid_argument("invariant query: lower must be <= upper");
    return estimate(smc, budget, cfg, seed,
                    [&](std::uint64_t run_seed, const BudgetWatch& watch,
                        bool& aborted) {
                        return run_invariant(model, cfg, query, run_seed, watch,
                                             aborted);
                    });
}

ProbabilityEstimate check_reach_box(const MotionModel1D& model,
                                    const PerturbationConfig& cfg,
                                    const ReachBoxQuery& query,
                                    const SmcConfig& smc, std::uint64_t seed,
                                    const RunBudget& budget) {
    model.validate();
    if (!(query.horizon_ms > 0.0))
        throw std::invalid_argument("reach query: horizon must be > 0");
    if (!(query.t_lo_ms <= query.t_hi_ms && query.t_hi_ms <= query.horizon_ms))
        throw std::invalid_argument("reach query: need t_lo <= t_hi <= horizon");
    if (query.x_lo_mm > query.x_hi_mm)
        throw std::invalid_argument("reach query: need x_lo <= x_hi");
    return estimate(smc, budget, cfg, seed,
                    [&](std::uint64_t run_seed, const BudgetWatch& watch,
                        bool& aborted) {
                        return run_reach_box(model, cfg, query, run_seed, watch,
                                             aborted);
                    });
}

Extrema estimate_extrema(const MotionModel1D& model, const PerturbationConfig& cfg,
                         double scope_ms, const SmcConfig& smc, std::uint64_t seed,
                         const RunBudget& budget) {
    model.validate();
    validate_smc(smc);
    if (!(scope_ms > 0.0))
        throw std::invalid_argument("extrema: scope must be > 0");
    const BudgetWatch watch = make_watch(smc, budget);
    const int total =
        (cfg.deterministic() && !smc.force_full_sampling) ? 1 : smc.run_count();

    double min_sum = 0.0;
    double max_sum = 0.0;
    int done = 0;
    for (int r = 0; r < total; ++r) {
        MotionStepper stepper(model, cfg, seed_for(seed, static_cast<std::uint64_t>(r)));
        double run_min = std::numeric_limits<double>::infinity();
        double run_max = -std::numeric_limits<double>::infinity();
        bool aborted = false;
        for (long i = 0;; ++i) {
            const double t = static_cast<double>(i) * model.dt_ms;
            if (t > scope_ms) break;
            if (watch.expired()) {
                aborted = true;
                break;
            }
            const double x = stepper.position(t);
            run_min = std::min(run_min, x);
            run_max = std::max(run_max, x);
        }
        if (aborted) break;
        min_sum += run_min;
        max_sum += run_max;
        ++done;
    }
    if (done == 0) return {0.0, 0.0};
    return {min_sum / done, max_sum / done};
}

} // namespace beamsched
