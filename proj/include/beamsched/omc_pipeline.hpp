#ifndef BEAMSCHED_OMC_PIPELINE_HPP
#define BEAMSCHED_OMC_PIPELINE_HPP

#include <array>
#include <cstdint>
#include <optional>

#include "beamsched/io.hpp"
#include "beamsched/model_fit.hpp"
#include "beamsched/motion_model.hpp"
#include "beamsched/smc.hpp"

namespace beamsched {

// Validation escalation per axis: one failed bounding-box check raises the
// tier by one, one success lowers it, clamped to [0, 4]. The slot's models
// count as invalid once every axis sits at tier 3 or 4.
struct TierState {
    std::array<int, 3> tier{0, 0, 0};
};

struct OmcConfig {
    double slot_interval_ms = 3000.0;
    double validity_window_ms = 6000.0;
    double validation_offset_ms = 1000.0; // t_o - t_m
    double box_t_plus_ms = 200.0;
    double box_t_minus_ms = 200.0;
    double box_x_plus_mm = 1.5;
    double box_x_minus_mm = 1.5;
    double tier_threshold = 0.8; // tp
    double fit_window_ms = 20000.0;
    double fallback_period_ms = 4000.0; // used when no oscillation is found
    double accuracy = 100.0;
    int axes = 3; // 1 or 3
    SmcConfig smc;
};

// The three axis models fitted for one slot, plus their validation outcome.
// All models share created_at (= the slot boundary) as their time origin.
struct SlotModelSet {
    long slot_index = -1;
    double created_at_ms = 0.0;
    std::array<MotionModel1D, 3> models{};
    std::array<bool, 3> fit_ok{false, false, false};
    std::array<double, 3> validity_prob{0.0, 0.0, 0.0};
    std::array<int, 3> tier{0, 0, 0};
    bool valid = false;
};

// Session slot boundaries: start + k * interval. In realtime mode wait_for
// sleeps until the boundary's wall time; batch mode returns immediately.
class SlotClock {
public:
    SlotClock(double start_ms, double interval_ms, bool realtime);

    double boundary_ms(long k) const;
    long slot_of(double session_ms) const; // last boundary at or before
    void wait_for(long k) const;           // no-op in batch mode

private:
    double start_ms_;
    double interval_ms_;
    bool realtime_;
    std::chrono::steady_clock::time_point wall_origin_;
};

// Replays a recorded or synthetic trace through the refit/validate cadence.
// Slot k's models are fitted from the trailing window at created_at and
// validated against the observation validation_offset later, so the feed
// must extend slightly past the boundary before the slot can be produced.
class OmcPipeline {
public:
    OmcPipeline(const MotionTrace& feed, const OmcConfig& cfg, std::uint64_t seed);

    // Processes the next slot; nullopt once the feed is exhausted.
    std::optional<SlotModelSet> run_slot();

    double session_origin_ms() const { return origin_ms_; }
    long slots_processed() const { return next_slot_; }
    const TierState& tier_state() const { return tiers_; }
    const OmcConfig& config() const { return cfg_; }

private:
    struct AxisOutcome {
        MotionModel1D model;
        bool fit_ok = false;
        double validity = 0.0;
    };

    AxisOutcome process_axis(int axis, double created_at) const;

    const MotionTrace& feed_;
    OmcConfig cfg_;
    std::uint64_t seed_;
    double origin_ms_;
    long next_slot_ = 0;
    TierState tiers_;
};

} // namespace beamsched

#endif
