#ifndef BEAMSCHED_MOTION_MODEL_HPP
#define BEAMSCHED_MOTION_MODEL_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "beamsched/rng.hpp"

namespace beamsched {

// One spatial axis of respiratory motion: a drifting baseline plus four
// cosine/sine harmonics of a common breathing period. Positions are mm,
// times are ms since the model's creation instant.
struct MotionModel1D {
    double period_ms = 4000.0;
    double drift = 0.0; // mm per ms
    double base = 0.0;  // mm
    std::array<double, 4> a{}; // cosine coefficients, harmonic k = index + 1
    std::array<double, 4> b{}; // sine coefficients
    double accuracy = 100.0;   // percent; 100 = fully deterministic
    double dt_ms = 38.0;       // stepping granularity

    double frequency() const { return 2.0 * M_PI / period_ms; }

    // Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

inline double eval_position(double base, double drift,
                            const std::array<double, 4>& a,
                            const std::array<double, 4>& b,
                            double freq, double t_ms) {
    double x = base + drift * t_ms;
    for (int k = 0; k < 4; ++k) {
        const double w = static_cast<double>(k + 1) * freq * t_ms;
        x += a[static_cast<std::size_t>(k)] * std::cos(w) +
             b[static_cast<std::size_t>(k)] * std::sin(w);
    }
    return x;
}

// Deterministic position at time t (ms since model creation).
inline double evaluate(const MotionModel1D& m, double t_ms) {
    return eval_position(m.base, m.drift, m.a, m.b, m.frequency(), t_ms);
}

// Noise process parameters. Six modifier processes run alongside the
// stepping: four perturb the (a[k], b[k]) pairs, one the base, one the
// frequency. Each waits a uniform-random time in [min_wait, max_wait] and
// then shifts its target by a uniform-random amount in [-rate, +rate].
struct PerturbationConfig {
    double term_rate = 0.0;  // mm, applied to a[k] and b[k]
    double base_rate = 0.0;  // mm
    double freq_rate = 0.0;  // 1/ms
    double min_wait_ms = 10.0;
    double max_wait_ms = 1000.0;

    bool deterministic() const {
        return term_rate == 0.0 && base_rate == 0.0 && freq_rate == 0.0;
    }
};

// Maps the session accuracy percentage onto modifier rates.
// accrate = (100 - accuracy) / 15; rates scale accrate by 0.1 (terms),
// 0.25 (base) and 0.0001 (frequency); waits are fixed at [10, 1000] ms.
PerturbationConfig derive_perturbation(double accuracy);

struct Trajectory {
    double start_time_ms = 0.0;
    double dt_ms = 38.0;
    std::vector<double> positions;

    double time_at(std::size_t i) const {
        return start_time_ms + static_cast<double>(i) * dt_ms;
    }
};

// Advances one stochastic run step by step. position(t) must be called with
// non-decreasing t; modifier events due at or before t are applied first.
class MotionStepper {
public:
    MotionStepper(const MotionModel1D& m, const PerturbationConfig& cfg,
                  std::uint64_t seed);

    double position(double t_ms);

private:
    void apply_due_events(double t_ms);

    std::array<double, 4> a_;
    std::array<double, 4> b_;
    double base_;
    double drift_;
    double freq_;
    PerturbationConfig cfg_;
    bool active_; // false when all rates are zero: no events to process
    std::array<double, 6> next_event_ms_{};
    Rng rng_;
};

// Simulates one noise-perturbed run of length horizon at dt spacing.
// Deterministic for a given seed; with all rates zero the result equals
// evaluate() at every step.
Trajectory simulate(const MotionModel1D& m, const PerturbationConfig& cfg,
                    double horizon_ms, std::uint64_t seed);

} // namespace beamsched

#endif
