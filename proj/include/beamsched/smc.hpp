#ifndef BEAMSCHED_SMC_HPP
#define BEAMSCHED_SMC_HPP

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>

#include "beamsched/motion_model.hpp"

namespace beamsched {

// Pr[<= scope] ([] lower <= position <= upper)
struct InvariantQuery {
    double scope_ms = 3000.0;
    double lower_mm = 0.0;
    double upper_mm = 0.0;
};

// Pr[<> within horizon] (time in [t_lo, t_hi] and position in [x_lo, x_hi]),
// times relative to model creation.
struct ReachBoxQuery {
    double horizon_ms = 0.0;
    double t_lo_ms = 0.0;
    double t_hi_ms = 0.0;
    double x_lo_mm = 0.0;
    double x_hi_mm = 0.0;
};

// Fixed-N Chernoff-Hoeffding sampling plan: run_count runs give
// P(|p_hat - p| > epsilon) <= delta.
struct SmcConfig {
    double epsilon = 0.05;
    double delta = 0.05;
    std::optional<double> deadline_ms; // wall-clock budget for one query
    // Skip the identical-run shortcut for deterministic configurations and
    // execute every run. Only useful for load/timing studies.
    bool force_full_sampling = false;

    int run_count() const {
        return static_cast<int>(
            std::ceil(std::log(2.0 / delta) / (2.0 * epsilon * epsilon)));
    }
};

struct ProbabilityEstimate {
    double p_hat = 0.0;
    int runs_used = 0;
    bool completed = true; // false iff the deadline cut the sampling short
};

class CancelSource;

// Cheap shared flag checked once per simulated step.
class CancelToken {
public:
    CancelToken() = default;

    bool cancelled() const {
        return flag_ && flag_->load(std::memory_order_relaxed);
    }

private:
    friend class CancelSource;
    explicit CancelToken(std::shared_ptr<std::atomic<bool>> flag)
        : flag_(std::move(flag)) {}

    std::shared_ptr<std::atomic<bool>> flag_;
};

class CancelSource {
public:
    CancelSource() : flag_(std::make_shared<std::atomic<bool>>(false)) {}

    CancelToken token() const { return CancelToken(flag_); }
    void cancel() { flag_->store(true, std::memory_order_relaxed); }
    bool cancelled() const { return flag_->load(std::memory_order_relaxed); }

private:
    std::shared_ptr<std::atomic<bool>> flag_;
};

// Absolute deadline plus cooperative cancellation, shared across the queries
// of one time slot. When empty, SmcConfig::deadline_ms (relative) applies.
struct RunBudget {
    std::optional<std::chrono::steady_clock::time_point> deadline;
    CancelToken cancel;
};

ProbabilityEstimate check_invariant(const MotionModel1D& model,
                                    const PerturbationConfig& cfg,
                                    const InvariantQuery& query,
                                    const SmcConfig& smc, std::uint64_t seed,
                                    const RunBudget& budget = {});

ProbabilityEstimate check_reach_box(const MotionModel1D& model,
                                    const PerturbationConfig& cfg,
                                    const ReachBoxQuery& query,
                                    const SmcConfig& smc, std::uint64_t seed,
                                    const RunBudget& budget = {});

struct Extrema {
    double min_mm = 0.0;
    double max_mm = 0.0;
};

// Mean over runs of each run's minimal and maximal position within scope.
Extrema estimate_extrema(const MotionModel1D& model, const PerturbationConfig& cfg,
                         double scope_ms, const SmcConfig& smc, std::uint64_t seed,
                         const RunBudget& budget = {});

} // namespace beamsched

#endif
