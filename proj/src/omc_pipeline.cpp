#include "beamsched/omc_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>

#include "beamsched/rng.hpp"

namespace beamsched {

SlotClock::SlotClock(double start_ms, double interval_ms, bool realtime)
    : start_ms_(start_ms), interval_ms_(interval_ms), realtime_(realtime),
      wall_origin_(std::chrono::steady_clock::now()) {
    if (!(interval_ms > 0.0))
        throw std::invalid_argument("slot clock: interval must be > 0");
}

double SlotClock::boundary_ms(long k) const {
    return start_ms_ + static_cast<double>(k) * interval_ms_;
}

long SlotClock::slot_of(double session_ms) const {
    if (session_ms < start_ms_) return -1;
    return static_cast<long>(std::floor((session_ms - start_ms_) / interval_ms_));
}

void SlotClock::wait_for(long k) const {
    if (!realtime_) return;
    const auto target =
        wall_origin_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                           std::chrono::duration<double, std::milli>(
                               static_cast<double>(k) * interval_ms_));
    std::this_thread::sleep_until(target);
}

OmcPipeline::OmcPipeline(const MotionTrace& feed, const OmcConfig& cfg,
                         std::uint64_t seed)
    : feed_(feed), cfg_(cfg), seed_(seed) {
    if (cfg.axes != 1 && cfg.axes != 3)
        throw std::invalid_argument("omc pipeline: axes must be 1 or 3");
    if (cfg.axes > feed.axes)
        throw std::invalid_argument("omc pipeline: feed has too few axes");
    if (!(cfg.slot_interval_ms > 0.0) || !(cfg.fit_window_ms > 0.0))
        throw std::invalid_argument("omc pipeline: intervals must be > 0");
    if (feed.t_ms.empty())
        throw std::invalid_argument("omc pipeline: empty feed");
    // first slot once a full fit window of history exists
    origin_ms_ = feed.t_ms.front() + cfg.fit_window_ms;
}

OmcPipeline::AxisOutcome OmcPipeline::process_axis(int axis, double created_at) const {
    AxisOutcome out;

    SampleWindow window;
    const auto& ts = feed_.t_ms;
    const auto& xs = feed_.axis[static_cast<std::size_t>(axis)];
    const double w_lo = created_at - cfg_.fit_window_ms;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] < w_lo) continue;
        if (ts[i] > created_at) break;
        window.t_ms.push_back(ts[i]);
        window.x_mm.push_back(xs[i]);
    }
    if (window.size() < 16) return out;

    const auto period = estimate_period(window);
    try {
        if (period) {
            FitResult fr = fit(window, *period, created_at);
            out.model = fr.model;
        } else {
            // No credible oscillation (flat or pure-drift axis): fall back to
            // a harmonic-free model so the slot can still be validated.
            double st = 0.0, sx = 0.0, stt = 0.0, stx = 0.0;
            const double t_ref = window.t_ms.front();
            for (std::size_t i = 0; i < window.size(); ++i) {
                const double t = window.t_ms[i] - t_ref;
                st += t;
                sx += window.x_mm[i];
                stt += t * t;
                stx += t * window.x_mm[i];
            }
            const double n = static_cast<double>(window.size());
            const double denom = n * stt - st * st;
            MotionModel1D flat;
            flat.period_ms = cfg_.fallback_period_ms;
            flat.drift = denom != 0.0 ? (n * stx - st * sx) / denom : 0.0;
            flat.base = sx / n + flat.drift * (created_at - t_ref - st / n);
            out.model = flat;
        }
    } catch (const std::invalid_argument&) {
        return out; // degenerate window; slot stays model-less on this axis
    }
    out.model.accuracy = cfg_.accuracy;
    out.fit_ok = true;

    // Validate against the observation one offset past the boundary: does the
    // model reach the box around the actually observed sample?
    const double t_obs_target = created_at + cfg_.validation_offset_ms;
    std::size_t obs = ts.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = ts.size(); i-- > 0;) {
        const double d = std::fabs(ts[i] - t_obs_target);
        if (d < best_dist) {
            best_dist = d;
            obs = i;
        }
        if (ts[i] < t_obs_target - 2000.0) break;
    }
    if (obs == ts.size()) return out;

    const double t_o = ts[obs] - created_at; // relative to model creation
    const double x_o = xs[obs];
    ReachBoxQuery q;
    q.horizon_ms = t_o + cfg_.box_t_plus_ms;
    q.t_lo_ms = std::max(0.0, t_o - cfg_.box_t_minus_ms);
    q.t_hi_ms = t_o + cfg_.box_t_plus_ms;
    q.x_lo_mm = x_o - cfg_.box_x_minus_mm;
    q.x_hi_mm = x_o + cfg_.box_x_plus_mm;

    const auto pcfg = derive_perturbation(cfg_.accuracy);
    const auto est = check_reach_box(
        out.model, pcfg, q, cfg_.smc,
        seed_for(seed_, static_cast<std::uint64_t>(next_slot_) * 8 +
                            static_cast<std::uint64_t>(axis)));
    out.validity = est.p_hat;
    return out;
}

std::optional<SlotModelSet> OmcPipeline::run_slot() {
    const double created_at =
        origin_ms_ + static_cast<double>(next_slot_) * cfg_.slot_interval_ms;
    // the validation observation must exist before the slot can be published
    if (feed_.t_ms.empty() ||
        feed_.t_ms.back() < created_at + cfg_.validation_offset_ms)
        return std::nullopt;

    SlotModelSet set;
    set.slot_index = next_slot_;
    set.created_at_ms = created_at;

    std::array<AxisOutcome, 3> outcomes;
    if (cfg_.axes == 3) {
        // one fit task per axis, joined at the slot barrier
        std::array<std::future<AxisOutcome>, 3> futures;
        for (int ax = 0; ax < 3; ++ax)
            futures[static_cast<std::size_t>(ax)] =
                std::async(std::launch::async,
                           [this, ax, created_at] { return process_axis(ax, created_at); });
        for (int ax = 0; ax < 3; ++ax)
            outcomes[static_cast<std::size_t>(ax)] =
                futures[static_cast<std::size_t>(ax)].get();
    } else {
        outcomes[0] = process_axis(0, created_at);
    }

    bool all_fit = true;
    bool all_high_tier = true;
    for (int ax = 0; ax < cfg_.axes; ++ax) {
        const auto& oc = outcomes[static_cast<std::size_t>(ax)];
        auto& tier = tiers_.tier[static_cast<std::size_t>(ax)];
        set.models[static_cast<std::size_t>(ax)] = oc.model;
        set.fit_ok[static_cast<std::size_t>(ax)] = oc.fit_ok;
        set.validity_prob[static_cast<std::size_t>(ax)] = oc.validity;
        all_fit = all_fit && oc.fit_ok;

        // missing fits count as violations so the tier keeps escalating
        const bool violated = !oc.fit_ok || oc.validity < cfg_.tier_threshold;
        tier = violated ? std::min(tier + 1, 4) : std::max(tier - 1, 0);
        set.tier[static_cast<std::size_t>(ax)] = tier;
        all_high_tier = all_high_tier && tier >= 3;
    }

    set.valid = all_fit && !all_high_tier;
    ++next_slot_;
    return set;
}

} // namespace beamsched
