#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "beamsched/datagen.hpp"
#include "beamsched/rng.hpp"

using namespace beamsched;

namespace {

MotionModel1D breathing_model(double base = 0.0) {
    MotionModel1D m;
    m.period_ms = 4200.0;
    m.base = base;
    m.a = {0.3, 0.05, 0.01, 0.0};
    m.b = {1.8, -0.2, 0.03, -0.01};
    return m;
}

// Small clinical-style 1D beam list the synthesis tests use as template.
BeamListFile figure_template() {
    BeamListFile list;
    list.mode = AxisMode::one_d;
    const struct {
        std::uint64_t id;
        double time, thr;
    } rows[] = {
        {80731, 24281, 5.0},  {76503, 11222, 5.0},  {75681, 13682, 7.5},
        {74528, 23749, 10.0}, {67108, 2243, 10.0},  {79427, 7133, 12.5},
        {70571, 16927, 15.0}, {77460, 4354, 15.0},  {70211, 16240, 15.0},
        {68851, 1488, 17.5},  {59592, 7335, 17.5},  {74430, 14448, 17.5},
        {69894, 29738, 20.0}, {77674, 1609, 20.0},  {78301, 16381, 22.5},
        {81561, 3116, 25.0},  {61025, 17047, 27.5}, {71430, 1758, 31.0},
        {81038, 21519, 31.0},
    };
    for (const auto& r : rows) {
        BeamSpec b;
        b.id = r.id;
        b.remaining_ms = r.time;
        b.bounds.push_back({-r.thr, r.thr});
        list.beams.push_back(b);
    }
    return list;
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

} // namespace

TEST_SUITE("datagen") {

TEST_CASE("event-free noiseless trace equals the closed form") {
    TraceGenSpec spec;
    spec.axes = {breathing_model(1.5)};
    spec.duration_ms = 30000.0;
    const MotionTrace trace = gen_motion_trace(spec, 1);
    REQUIRE(trace.axes == 1);
    for (std::size_t i = 0; i < trace.size(); ++i)
        CHECK(trace.axis[0][i] == evaluate(spec.axes[0], trace.t_ms[i]));
}

TEST_CASE("baseline step shifts the windowed mean by its value") {
    TraceGenSpec spec;
    spec.axes = {breathing_model(0.0)};
    spec.duration_ms = 120000.0;
    TraceEvent ev;
    ev.kind = TraceEvent::Kind::baseline;
    ev.at_ms = 60000.0;
    ev.fade_ms = 2000.0;
    ev.value = 20.0;
    spec.events = {ev};
    const MotionTrace trace = gen_motion_trace(spec, 7);

    auto mean_between = [&](double lo, double hi) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            if (trace.t_ms[i] >= lo && trace.t_ms[i] < hi) {
                sum += trace.axis[0][i];
                ++count;
            }
        }
        return sum / count;
    };
    // windows of whole periods away from the fade
    const double before = mean_between(10000.0, 52000.0);
    const double after = mean_between(70000.0, 112000.0);
    CHECK(std::fabs((after - before) - 20.0) < 0.1);
}

TEST_CASE("amplitude ramp doubles the peak-to-peak swing") {
    TraceGenSpec spec;
    spec.axes = {breathing_model(0.0)};
    spec.duration_ms = 300000.0;
    TraceEvent ev;
    ev.kind = TraceEvent::Kind::amplitude;
    ev.at_ms = 0.0;
    ev.fade_ms = 300000.0;
    ev.value = 2.0;
    spec.events = {ev};
    const MotionTrace trace = gen_motion_trace(spec, 12);

    auto peak_to_peak = [&](double lo, double hi) {
        double mn = 1e300, mx = -1e300;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            if (trace.t_ms[i] >= lo && trace.t_ms[i] < hi) {
                mn = std::min(mn, trace.axis[0][i]);
                mx = std::max(mx, trace.axis[0][i]);
            }
        }
        return mx - mn;
    };
    const double first_minute = peak_to_peak(0.0, 60000.0);
    const double last_minute = peak_to_peak(240000.0, 300000.0);
    // the ramp reaches x1.2 by the end of minute one and x1.8..2.0 in the last
    CHECK(last_minute / first_minute > 1.5);
    CHECK(last_minute / first_minute < 2.1);
}

TEST_CASE("period change keeps the curve phase continuous") {
    TraceGenSpec spec;
    spec.axes = {breathing_model(0.0)};
    spec.duration_ms = 60000.0;
    TraceEvent ev;
    ev.kind = TraceEvent::Kind::period;
    ev.at_ms = 30000.0;
    ev.fade_ms = 0.0;
    ev.value = 2800.0;
    spec.events = {ev};
    const MotionTrace trace = gen_motion_trace(spec, 3);
    // no jump larger than the largest per-step slope of the base curve
    double max_step = 0.0;
    for (std::size_t i = 1; i < trace.size(); ++i)
        max_step = std::max(max_step,
                            std::fabs(trace.axis[0][i] - trace.axis[0][i - 1]));
    // amplitude ~2.1mm, fastest new period 2800ms -> step bound ~0.4mm
    CHECK(max_step < 0.5);
}

TEST_CASE("noise events control the jitter level") {
    TraceGenSpec spec;
    spec.axes = {breathing_model(0.0)};
    spec.duration_ms = 60000.0;
    TraceEvent ev;
    ev.kind = TraceEvent::Kind::noise;
    ev.at_ms = 30000.0;
    ev.fade_ms = 0.0;
    ev.value = 0.5;
    spec.events = {ev};
    const MotionTrace noisy = gen_motion_trace(spec, 5);

    TraceGenSpec clean_spec = spec;
    clean_spec.events.clear();
    const MotionTrace clean = gen_motion_trace(clean_spec, 5);

    double dev_before = 0.0, dev_after = 0.0;
    int n_before = 0, n_after = 0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        const double d = noisy.axis[0][i] - clean.axis[0][i];
        if (noisy.t_ms[i] < 30000.0) {
            dev_before += d * d;
            ++n_before;
        } else {
            dev_after += d * d;
            ++n_after;
        }
    }
    CHECK(dev_before == 0.0);
    const double sigma_after = std::sqrt(dev_after / n_after);
    CHECK(sigma_after > 0.4);
    CHECK(sigma_after < 0.6);
}

TEST_CASE("overlapping events are rejected") {
    TraceGenSpec spec;
    spec.axes = {breathing_model(0.0)};
    spec.duration_ms = 60000.0;
    TraceEvent e1, e2;
    e1.kind = e2.kind = TraceEvent::Kind::baseline;
    e1.at_ms = 10000.0;
    e1.fade_ms = 5000.0;
    e1.value = 5.0;
    e2.at_ms = 12000.0; // inside e1's fade
    e2.fade_ms = 0.0;
    e2.value = -5.0;
    spec.events = {e1, e2};
    CHECK_THROWS_AS(gen_motion_trace(spec, 1), std::invalid_argument);
}

TEST_CASE("trace generation is deterministic per seed") {
    TraceGenSpec spec;
    spec.axes = {breathing_model(0.0)};
    spec.duration_ms = 20000.0;
    spec.noise_sigma = 0.3;
    const MotionTrace t1 = gen_motion_trace(spec, 77);
    const MotionTrace t2 = gen_motion_trace(spec, 77);
    const MotionTrace t3 = gen_motion_trace(spec, 78);
    REQUIRE(t1.size() == t2.size());
    bool same = true, differs = false;
    for (std::size_t i = 0; i < t1.size(); ++i) {
        same = same && t1.axis[0][i] == t2.axis[0][i];
        differs = differs || t1.axis[0][i] != t3.axis[0][i];
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("three-axis generation fills all columns") {
    TraceGenSpec spec;
    spec.axes = {breathing_model(-3.6), breathing_model(1.7), breathing_model(1.8)};
    spec.duration_ms = 10000.0;
    const MotionTrace trace = gen_motion_trace(spec, 2);
    REQUIRE(trace.axes == 3);
    CHECK(trace.axis[0].size() == trace.size());
    CHECK(trace.axis[1].size() == trace.size());
    CHECK(trace.axis[2].size() == trace.size());
    CHECK(trace.axis[0][0] != trace.axis[1][0]);
}

TEST_CASE("synthesized beam lists preserve the template distribution") {
    const BeamListFile tmpl = figure_template();
    const BeamListFile out = gen_beam_list(tmpl, 1000, 99);
    REQUIRE(out.beams.size() == 1000);

    std::vector<double> thr, times;
    for (const auto& b : out.beams) {
        thr.push_back(b.bounds[0].upper_mm);
        times.push_back(b.remaining_ms);
        CHECK(b.remaining_ms > 0.0);
    }
    const double thr_min = *std::min_element(thr.begin(), thr.end());
    const double thr_max = *std::max_element(thr.begin(), thr.end());
    CHECK(thr_min >= 5.0);
    CHECK(thr_max <= 31.0);

    std::vector<double> tmpl_thr, tmpl_times;
    for (const auto& b : tmpl.beams) {
        tmpl_thr.push_back(b.bounds[0].upper_mm);
        tmpl_times.push_back(b.remaining_ms);
    }
    for (double q : {0.25, 0.5, 0.75}) {
        CHECK(std::fabs(quantile(thr, q) - quantile(tmpl_thr, q)) /
                  quantile(tmpl_thr, q) <
              0.05);
        CHECK(std::fabs(quantile(times, q) - quantile(tmpl_times, q)) /
                  quantile(tmpl_times, q) <
              0.05);
    }
    const double mean_thr = std::accumulate(thr.begin(), thr.end(), 0.0) / 1000.0;
    const double tmpl_mean =
        std::accumulate(tmpl_thr.begin(), tmpl_thr.end(), 0.0) / 19.0;
    CHECK(std::fabs(mean_thr - tmpl_mean) / tmpl_mean < 0.05);
}

TEST_CASE("single-row synthesis stays within the template range") {
    const BeamListFile tmpl = figure_template();
    const BeamListFile out = gen_beam_list(tmpl, 1, 5);
    REQUIRE(out.beams.size() == 1);
    CHECK(out.beams[0].bounds[0].upper_mm >= 5.0);
    CHECK(out.beams[0].bounds[0].upper_mm <= 31.0);
    CHECK(out.beams[0].remaining_ms >= 1488.0);
    CHECK(out.beams[0].remaining_ms <= 29738.0);
}

TEST_CASE("writers always emit files their parsers accept") {
    Rng rng(6006);
    const BeamListFile tmpl = figure_template();
    for (int iter = 0; iter < 20; ++iter) {
        const BeamListFile synth =
            gen_beam_list(tmpl, 1 + static_cast<int>(rng.uniform(0.0, 40.0)),
                          rng.next_u64());
        const std::string text = write_beam_list(synth);
        const BeamListFile back = parse_beam_list(text);
        CHECK(write_beam_list(back) == text);

        TraceGenSpec spec;
        spec.axes = {breathing_model(rng.uniform(-5.0, 5.0))};
        spec.duration_ms = 4000.0 + rng.uniform(0.0, 4000.0);
        spec.noise_sigma = rng.uniform(0.0, 0.4);
        const MotionTrace trace = gen_motion_trace(spec, rng.next_u64());
        const std::string trace_text = write_motion_trace(trace);
        const MotionTrace trace_back = parse_motion_trace(trace_text);
        CHECK(write_motion_trace(trace_back) == trace_text);
    }
}

TEST_CASE("beam synthesis is deterministic and ids are unique") {
    const BeamListFile tmpl = figure_template();
    const BeamListFile o1 = gen_beam_list(tmpl, 50, 3);
    const BeamListFile o2 = gen_beam_list(tmpl, 50, 3);
    for (std::size_t i = 0; i < 50; ++i) {
        CHECK(o1.beams[i].remaining_ms == o2.beams[i].remaining_ms);
        CHECK(o1.beams[i].bounds[0].upper_mm == o2.beams[i].bounds[0].upper_mm);
        for (std::size_t j = i + 1; j < 50; ++j)
            CHECK(o1.beams[i].id != o1.beams[j].id);
    }
    CHECK_THROWS_AS(gen_beam_list(tmpl, 0, 1), std::invalid_argument);
}

} // TEST_SUITE
