#include "beamsched/motion_model.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace beamsched {

void MotionModel1D::validate() const {
    if (!(period_ms > 0.0))
        throw std::invalid_argument("motion model: period must be > 0");
    if (!(dt_ms > 0.0))
        throw std::invalid_argument("motion model: dt must be > 0");
    if (!(accuracy >= 0.0 && accuracy <= 100.0))
        throw std::invalid_argument("motion model: accuracy must be in [0, 100]");
    if (!std::isfinite(base) || !std::isfinite(drift))
        throw std::invalid_argument("motion model: base/drift must be finite");
    for (int k = 0; k < 4; ++k) {
        if (!std::isfinite(a[static_cast<std::size_t>(k)]) ||
            !std::isfinite(b[static_cast<std::size_t>(k)]))
            throw std::invalid_argument("motion model: coefficients must be finite");
    }
}

PerturbationConfig derive_perturbation(double accuracy) {
    if (!(accuracy >= 0.0 && accuracy <= 100.0))
        throw std::invalid_argument("accuracy must be in [0, 100]");
    const double accrate = (100.0 - accuracy) / 15.0;
    PerturbationConfig cfg;
    cfg.term_rate = accrate * 0.1;
    cfg.base_rate = accrate * 0.25;
    cfg.freq_rate = accrate * 0.0001;
    cfg.min_wait_ms = 10.0;
    cfg.max_wait_ms = 1000.0;
    return cfg;
}

MotionStepper::MotionStepper(const MotionModel1D& m, const PerturbationConfig& cfg,
                             std::uint64_t seed)
    : a_(m.a), b_(m.b), base_(m.base), drift_(m.drift), freq_(m.frequency()),
      cfg_(cfg), active_(!cfg.deterministic()), rng_(seed) {
    if (active_) {
        if (!(cfg.min_wait_ms > 0.0) || cfg.min_wait_ms > cfg.max_wait_ms)
            throw std::invalid_argument("perturbation: need 0 < min_wait <= max_wait");
        for (auto& next : next_event_ms_)
            next = rng_.uniform(cfg_.min_wait_ms, cfg_.max_wait_ms);
    }
}

void MotionStepper::apply_due_events(double t_ms) {
    for (;;) {
        int which = -1;
        double when = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 6; ++i) {
            const double next = next_event_ms_[static_cast<std::size_t>(i)];
            if (next <= t_ms && next < when) {
                when = next;
                which = i;
            }
        }
        if (which < 0) return;
        if (which < 4) {
            a_[static_cast<std::size_t>(which)] +=
                rng_.uniform(-cfg_.term_rate, cfg_.term_rate);
            b_[static_cast<std::size_t>(which)] +=
                rng_.uniform(-cfg_.term_rate, cfg_.term_rate);
        } else if (which == 4) {
            base_ += rng_.uniform(-cfg_.base_rate, cfg_.base_rate);
        } else {
            freq_ += rng_.uniform(-cfg_.freq_rate, cfg_.freq_rate);
            // a frequency random walk must not cross zero
            freq_ = std::max(freq_, 1e-5);
        }
        next_event_ms_[static_cast<std::size_t>(which)] =
            when + rng_.uniform(cfg_.min_wait_ms, cfg_.max_wait_ms);
    }
}

double MotionStepper::position(double t_ms) {
    if (active_) apply_due_events(t_ms);
    return eval_position(base_, drift_, a_, b_, freq_, t_ms);
}

Trajectory simulate(const MotionModel1D& m, const PerturbationConfig& cfg,
                    double horizon_ms, std::uint64_t seed) {
    m.validate();
    if (!(horizon_ms > 0.0))
        throw std::invalid_argument("simulate: horizon must be > 0");
    MotionStepper stepper(m, cfg, seed);
    Trajectory traj;
    traj.dt_ms = m.dt_ms;
    traj.positions.reserve(static_cast<std::size_t>(horizon_ms / m.dt_ms) + 2);
    for (long i = 0;; ++i) {
        const double t = static_cast<double>(i) * m.dt_ms;
        if (t > horizon_ms) break;
        traj.positions.push_back(stepper.position(t));
    }
    return traj;
}

} // namespace beamsched
