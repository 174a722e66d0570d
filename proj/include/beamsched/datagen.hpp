#ifndef BEAMSCHED_DATAGEN_HPP
#define BEAMSCHED_DATAGEN_HPP

#include <cstdint>
#include <vector>

#include "beamsched/io.hpp"
#include "beamsched/motion_model.hpp"

namespace beamsched {

// Scripted change applied to a generated trace. Values fade in linearly over
// fade_ms starting at at_ms:
//   period    — new breathing period (ms), phase continuous
//   amplitude — multiplicative factor on the harmonic scale in effect
//   baseline  — additive shift of the base position (mm)
//   noise     — new per-sample Gaussian sigma (mm)
struct TraceEvent {
    enum class Kind { period, amplitude, baseline, noise };
    Kind kind = Kind::baseline;
    double at_ms = 0.0;
    double fade_ms = 0.0;
    double value = 0.0;
    int axis = -1; // -1 applies to every axis
};

struct TraceGenSpec {
    std::vector<MotionModel1D> axes; // one or three base models
    double sample_interval_ms = 38.0;
    double duration_ms = 60000.0;
    double noise_sigma = 0.0;
    std::vector<TraceEvent> events;
};

// Deterministic per seed. Without events and with sigma zero the trace equals
// the base models' closed form at every sample. Overlapping fades on the
// same (axis, parameter) are rejected.
MotionTrace gen_motion_trace(const TraceGenSpec& spec, std::uint64_t seed);

// Samples a new beam list whose Time and Threshold columns follow the
// template's empirical distributions (inverse-CDF with linear interpolation
// between order statistics, drawn independently). IDs are fresh.
BeamListFile gen_beam_list(const BeamListFile& tmpl, int n, std::uint64_t seed);

} // namespace beamsched

#endif
