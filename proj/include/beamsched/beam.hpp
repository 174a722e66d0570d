#ifndef BEAMSCHED_BEAM_HPP
#define BEAMSCHED_BEAM_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

namespace beamsched {

enum class AxisMode { one_d, three_d };

inline int axis_count(AxisMode mode) { return mode == AxisMode::one_d ? 1 : 3; }

struct AxisBounds {
    double lower_mm = 0.0;
    double upper_mm = 0.0;

    double width() const { return upper_mm - lower_mm; }
    bool contains(double x) const { return x >= lower_mm && x <= upper_mm; }
};

// One treatment beam: required beam-on time still outstanding plus the
// per-axis position band within which delivery is collision free.
struct BeamSpec {
    std::uint64_t id = 0;
    double remaining_ms = 0.0;
    std::vector<AxisBounds> bounds; // one entry in 1D mode, three in 3D
    bool started = false;
    bool running = false;

    // narrowest axis band; the scheduling keys use this
    double min_width() const {
        double w = std::numeric_limits<double>::infinity();
        for (const auto& bb : bounds) w = std::min(w, bb.width());
        return w;
    }

    bool feasible_at(const double* position) const {
        for (std::size_t axis = 0; axis < bounds.size(); ++axis)
            if (!bounds[axis].contains(position[axis])) return false;
        return true;
    }
};

} // namespace beamsched

#endif
