#ifndef BEAMSCHED_MODEL_FIT_HPP
#define BEAMSCHED_MODEL_FIT_HPP

#include <optional>
#include <vector>

#include "beamsched/motion_model.hpp"

namespace beamsched {

// Timestamped positions of one axis, timestamps strictly increasing.
struct SampleWindow {
    std::vector<double> t_ms;
    std::vector<double> x_mm;

    std::size_t size() const { return t_ms.size(); }
    double span_ms() const {
        return t_ms.empty() ? 0.0 : t_ms.back() - t_ms.front();
    }
};

// Dominant oscillation period found by an autocorrelation peak inside the
// physiological band [1500, 10000] ms. Returns nothing when the window has
// no credible oscillation (constant or pure-drift signals).
std::optional<double> estimate_period(const SampleWindow& window);

struct FitResult {
    MotionModel1D model;
    double residual_rms = 0.0;
};

// Fits base, drift and the four harmonic pairs by least squares, refining the
// supplied period estimate against the window. The returned model's time
// origin (t = 0) is origin_ms on the window's timestamp axis.
//
// Throws std::invalid_argument when the window is degenerate: shorter than
// two periods or sampled coarser than 8 samples per period.
FitResult fit(const SampleWindow& window, double period_hint_ms, double origin_ms);

// Convenience overload: origin at the last sample.
FitResult fit(const SampleWindow& window, double period_hint_ms);

} // namespace beamsched

#endif
