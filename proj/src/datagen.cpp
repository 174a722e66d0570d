#include "beamsched/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "beamsched/rng.hpp"

namespace beamsched {
namespace {

// Piecewise-linear parameter schedule assembled from events of one kind.
struct Schedule {
    struct Segment {
        double at;
        double fade;
        double from;
        double to;
    };
    double initial = 0.0;
    std::vector<Segment> segments;

    double at(double t) const {
        double value = initial;
        for (const auto& seg : segments) {
            if (t < seg.at) break;
            if (seg.fade <= 0.0 || t >= seg.at + seg.fade) {
                value = seg.to;
            } else {
                const double f = (t - seg.at) / seg.fade;
                value = seg.from + f * (seg.to - seg.from);
            }
        }
        return value;
    }

    bool empty() const { return segments.empty(); }
};

Schedule build_schedule(const std::vector<TraceEvent>& events, TraceEvent::Kind kind,
                        int axis, double initial, bool additive, bool multiplicative) {
    Schedule sched;
    sched.initial = initial;
    std::vector<TraceEvent> mine;
    for (const auto& ev : events)
        if (ev.kind == kind && (ev.axis == -1 || ev.axis == axis))
            mine.push_back(ev);
    std::sort(mine.begin(), mine.end(),
              [](const TraceEvent& x, const TraceEvent& y) { return x.at_ms < y.at_ms; });
    double current = initial;
    double prev_end = -1.0;
    for (const auto& ev : mine) {
        if (ev.at_ms < prev_end)
            throw std::invalid_argument("gen_motion_trace: overlapping events");
        double target = ev.value;
        if (additive) target = current + ev.value;
        if (multiplicative) target = current * ev.value;
        sched.segments.push_back({ev.at_ms, ev.fade_ms, current, target});
        current = target;
        prev_end = ev.at_ms + std::max(ev.fade_ms, 0.0);
    }
    return sched;
}

} // namespace

MotionTrace gen_motion_trace(const TraceGenSpec& spec, std::uint64_t seed) {
    if (spec.axes.size() != 1 && spec.axes.size() != 3)
        throw std::invalid_argument("gen_motion_trace: need one or three axis models");
    if (!(spec.sample_interval_ms > 0.0) || !(spec.duration_ms > 0.0))
        throw std::invalid_argument("gen_motion_trace: interval/duration must be > 0");
    for (const auto& m : spec.axes) m.validate();
    for (const auto& ev : spec.events) {
        if (ev.at_ms < 0.0 || ev.fade_ms < 0.0)
            throw std::invalid_argument("gen_motion_trace: negative event time");
        if (ev.kind == TraceEvent::Kind::period && !(ev.value > 0.0))
            throw std::invalid_argument("gen_motion_trace: period event must be > 0");
        if (ev.kind == TraceEvent::Kind::noise && ev.value < 0.0)
            throw std::invalid_argument("gen_motion_trace: negative noise sigma");
    }

    const int axes = static_cast<int>(spec.axes.size());
    MotionTrace trace;
    trace.axes = axes;

    const std::size_t steps =
        static_cast<std::size_t>(std::floor(spec.duration_ms / spec.sample_interval_ms)) +
        1;

    Rng rng(seed);
    for (int ax = 0; ax < axes; ++ax) {
        const MotionModel1D& m = spec.axes[static_cast<std::size_t>(ax)];
        const Schedule period = build_schedule(spec.events, TraceEvent::Kind::period,
                                               ax, m.period_ms, false, false);
        const Schedule amp = build_schedule(spec.events, TraceEvent::Kind::amplitude,
                                            ax, 1.0, false, true);
        const Schedule baseline = build_schedule(
            spec.events, TraceEvent::Kind::baseline, ax, m.base, true, false);
        const Schedule noise = build_schedule(spec.events, TraceEvent::Kind::noise, ax,
                                              spec.noise_sigma, false, false);

        auto& column = trace.axis[static_cast<std::size_t>(ax)];
        column.reserve(steps);

        const bool pristine = period.empty() && amp.empty() && baseline.empty() &&
                              noise.empty() && spec.noise_sigma == 0.0;

        double phase = 0.0; // accumulated fundamental phase when the period varies
        double prev_t = 0.0;
        for (std::size_t i = 0; i < steps; ++i) {
            const double t = static_cast<double>(i) * spec.sample_interval_ms;
            if (ax == 0) trace.t_ms.push_back(t);

            if (pristine) {
                column.push_back(evaluate(m, t));
                continue;
            }

            double x;
            if (period.empty()) {
                const double s = amp.at(t);
                std::array<double, 4> sa, sb;
                for (int k = 0; k < 4; ++k) {
                    sa[static_cast<std::size_t>(k)] =
                        m.a[static_cast<std::size_t>(k)] * s;
                    sb[static_cast<std::size_t>(k)] =
                        m.b[static_cast<std::size_t>(k)] * s;
                }
                x = eval_position(baseline.at(t), m.drift, sa, sb, m.frequency(), t);
            } else {
                // integrate the phase so period changes stay continuous
                phase += 2.0 * M_PI * (t - prev_t) / period.at(t);
                prev_t = t;
                const double s = amp.at(t);
                x = baseline.at(t) + m.drift * t;
                for (int k = 0; k < 4; ++k) {
                    const double w = static_cast<double>(k + 1) * phase;
                    x += s * (m.a[static_cast<std::size_t>(k)] * std::cos(w) +
                              m.b[static_cast<std::size_t>(k)] * std::sin(w));
                }
            }
            const double sigma = noise.at(t);
            if (sigma > 0.0) x += rng.normal(0.0, sigma);
            column.push_back(x);
        }
    }
    return trace;
}

namespace {

double empirical_quantile(const std::vector<double>& sorted, double u) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = u * static_cast<double>(n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double f = h - static_cast<double>(lo);
    return sorted[lo] + f * (sorted[hi] - sorted[lo]);
}

// One stratified uniform draw per output row, then shuffled. Keeps the
// sampled column's quantiles tight around the template's even for small n.
std::vector<double> stratified_uniforms(int n, Rng& rng) {
    std::vector<double> u(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        u[static_cast<std::size_t>(i)] =
            (static_cast<double>(i) + rng.uniform()) / static_cast<double>(n);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform() * (i + 1));
        std::swap(u[static_cast<std::size_t>(i)], u[static_cast<std::size_t>(j)]);
    }
    return u;
}

} // namespace

BeamListFile gen_beam_list(const BeamListFile& tmpl, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_beam_list: n must be >= 1");
    if (tmpl.beams.empty())
        throw std::invalid_argument("gen_beam_list: empty template");

    BeamListFile out;
    out.mode = tmpl.mode;
    out.beams.reserve(static_cast<std::size_t>(n));

    Rng rng(seed);

    std::vector<double> times;
    times.reserve(tmpl.beams.size());
    for (const auto& b : tmpl.beams) times.push_back(b.remaining_ms);
    std::sort(times.begin(), times.end());

    const std::vector<double> time_u = stratified_uniforms(n, rng);

    if (tmpl.mode == AxisMode::one_d) {
        std::vector<double> thresholds;
        thresholds.reserve(tmpl.beams.size());
        for (const auto& b : tmpl.beams) thresholds.push_back(b.bounds[0].upper_mm);
        std::sort(thresholds.begin(), thresholds.end());
        const std::vector<double> thr_u = stratified_uniforms(n, rng);

        for (int i = 0; i < n; ++i) {
            BeamSpec beam;
            beam.id = 100001 + static_cast<std::uint64_t>(i);
            beam.remaining_ms = std::max(
                1.0, std::round(empirical_quantile(
                         times, time_u[static_cast<std::size_t>(i)])));
            const double thr =
                empirical_quantile(thresholds, thr_u[static_cast<std::size_t>(i)]);
            beam.bounds.push_back({-thr, thr});
            out.beams.push_back(std::move(beam));
        }
    } else {
        // keep per-axis (low, high) pairs intact by sampling template rows
        for (int i = 0; i < n; ++i) {
            BeamSpec beam;
            beam.id = 100001 + static_cast<std::uint64_t>(i);
            beam.remaining_ms = std::max(
                1.0, std::round(empirical_quantile(
                         times, time_u[static_cast<std::size_t>(i)])));
            for (int ax = 0; ax < 3; ++ax) {
                const auto& row = tmpl.beams[static_cast<std::size_t>(
                    rng.uniform() * static_cast<double>(tmpl.beams.size()))];
                beam.bounds.push_back(row.bounds[static_cast<std::size_t>(ax)]);
            }
            out.beams.push_back(std::move(beam));
        }
    }
    return out;
}

} // namespace beamsched
