// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "beamsched/beam_service.hpp"
#include "beamsched/datagen.hpp"
#include "beamsched/io.hpp"
#include "beamsched/model_fit.hpp"
#include "beamsched/motion_model.hpp"
#include "beamsched/omc_pipeline.hpp"
#include "beamsched/protocol.hpp"
#include "beamsched/rng.hpp"
#include "beamsched/smc.hpp"
#include "beamsched/treatment.hpp"

using namespace beamsched;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
    void note(const std::string& text) {
        if (!detail.empty()) detail += "; ";
        detail += text;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

MotionModel1D reference_global_model() {
    MotionModel1D m;
    m.period_ms = 3469.0;
    m.drift = 0.0;
    m.base = 2.5019;
    m.a = {-0.1959, 0.0295, -0.0022, -0.0169};
    m.b = {-0.4023, 0.0294, 0.033, 0.013};
    return m;
}

MotionModel1D breathing_base_model() {
    MotionModel1D m;
    m.period_ms = 4200.0;
    m.base = 0.0;
    m.a = {0.3, 0.05, 0.01, 0.0};
    m.b = {1.6, -0.2, 0.03, -0.01};
    return m;
}

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

// dense analytic evaluation at every dt step
bool dense_invariant_verdict(const MotionModel1D& m, const InvariantQuery& q) {
    for (long i = 0;; ++i) {
        const double t = static_cast<double>(i) * m.dt_ms;
        if (t > q.scope_ms) break;
        const double x = evaluate(m, t);
        if (x < q.lower_mm || x > q.upper_mm) return false;
    }
    return true;
}

// high-N reference estimate, split across two threads
double reference_probability(const MotionModel1D& m, const PerturbationConfig& cfg,
                             const InvariantQuery& q, int runs, std::uint64_t seed) {
    std::atomic<int> sat{0};
    auto worker = [&](int lo, int hi) {
        int local = 0;
        for (int r = lo; r < hi; ++r) {
            MotionStepper st(m, cfg, seed_for(seed, static_cast<std::uint64_t>(r)));
            bool ok = true;
            for (long i = 0;; ++i) {
                const double t = static_cast<double>(i) * m.dt_ms;
                if (t > q.scope_ms) break;
                const double x = st.position(t);
                if (x < q.lower_mm || x > q.upper_mm) {
                    ok = false;
                    break;
                }
            }
            local += ok ? 1 : 0;
        }
        sat += local;
    };
    std::thread a(worker, 0, runs / 2);
    std::thread b(worker, runs / 2, runs);
    a.join();
    b.join();
    return static_cast<double>(sat.load()) / runs;
}

// ---- criteria -------------------------------------------------------------

Check criterion_formula() {
    Check c;
    const MotionModel1D m = reference_global_model();
    long double expected = 2.5019L;
    for (double ak : m.a) expected += static_cast<long double>(ak);
    const double got = evaluate(m, 0.0);
    c.require(std::fabs(got - 2.3164) < 1e-9, "evaluate(0) != 2.3164 +- 1e-9");
    c.require(std::fabs(got - static_cast<double>(expected)) < 1e-12,
              "independent coefficient sum disagrees");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "evaluate(0) = %.10f", got);
    c.note(buf);
    return c;
}

Check criterion_fit_round_trip() {
    Check c;
    Rng rng(20240518);
    int worst_param = -1;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        MotionModel1D truth;
        truth.period_ms = rng.uniform(2500.0, 8000.0);
        truth.base = rng.uniform(-15.0, 15.0);
        truth.drift =
            (rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * rng.uniform(1e-4, 2e-3);
        truth.a[0] = rng.uniform(0.3, 2.5);
        truth.b[0] = rng.uniform(0.3, 2.5);
        for (int k = 1; k < 4; ++k) {
            truth.a[k] = (rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) *
                         rng.uniform(0.02, 0.4);
            truth.b[k] = (rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) *
                         rng.uniform(0.02, 0.4);
        }

        const Trajectory traj =
            simulate(truth, derive_perturbation(100.0), 25000.0, 7);
        SampleWindow window;
        for (std::size_t i = 0; i < traj.positions.size(); ++i) {
            window.t_ms.push_back(traj.time_at(i));
            window.x_mm.push_back(traj.positions[i]);
        }
        const auto hint = estimate_period(window);
        c.require(hint.has_value(), "period estimation failed on a clean signal");
        if (!hint) return c;
        const FitResult res = fit(window, *hint, 0.0);

        const double params_truth[] = {truth.period_ms, truth.base, truth.drift,
                                       truth.a[0], truth.a[1], truth.a[2], truth.a[3],
                                       truth.b[0], truth.b[1], truth.b[2], truth.b[3]};
        const double params_fit[] = {res.model.period_ms, res.model.base,
                                     res.model.drift, res.model.a[0], res.model.a[1],
                                     res.model.a[2], res.model.a[3], res.model.b[0],
                                     res.model.b[1], res.model.b[2], res.model.b[3]};
        for (int p = 0; p < 11; ++p) {
            const double rel =
                std::fabs(params_fit[p] - params_truth[p]) / std::fabs(params_truth[p]);
            if (rel > worst) {
                worst = rel;
                worst_param = p;
            }
        }
    }
    c.require(worst < 1e-6, "relative error " + std::to_string(worst) + " on param " +
                                std::to_string(worst_param));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "50 models, worst relative error %.2e", worst);
    c.note(buf);
    return c;
}

Check criterion_smc_oracle() {
    Check c;
    Rng rng(7777);

    // deterministic verdict agreement
    int sat_count = 0;
    for (int trial = 0; trial < 200; ++trial) {
        MotionModel1D m;
        m.period_ms = rng.uniform(2000.0, 8000.0);
        m.base = rng.uniform(-5.0, 5.0);
        m.drift = rng.uniform(-0.0005, 0.0005);
        for (int k = 0; k < 4; ++k) {
            m.a[k] = rng.uniform(-1.5, 1.5);
            m.b[k] = rng.uniform(-1.5, 1.5);
        }
        double lo = 1e300, hi = -1e300;
        for (long i = 0; i * 38 <= 3000; ++i) {
            const double x = evaluate(m, i * 38.0);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        InvariantQuery q;
        q.scope_ms = 3000.0;
        q.lower_mm = lo - rng.uniform(-0.4, 0.4);
        q.upper_mm = hi + rng.uniform(-0.4, 0.4);
        if (q.lower_mm > q.upper_mm) std::swap(q.lower_mm, q.upper_mm);

        const auto est = check_invariant(m, derive_perturbation(100.0), q,
                                         SmcConfig{}, 13);
        const bool want = dense_invariant_verdict(m, q);
        c.require(est.p_hat == (want ? 1.0 : 0.0),
                  "verdict mismatch on trial " + std::to_string(trial));
        sat_count += want ? 1 : 0;
    }
    c.require(sat_count > 20 && sat_count < 180,
              "randomized bounds did not exercise both verdicts");

    // stochastic agreement with a 100k-run reference, 100 trials
    const MotionModel1D m = reference_global_model();
    const auto pcfg = derive_perturbation(85.0);
    double amplitude = 0.0;
    for (int k = 0; k < 4; ++k)
        amplitude += std::sqrt(m.a[k] * m.a[k] + m.b[k] * m.b[k]);

    int in_tolerance = 0;
    int trials_total = 0;
    for (int config = 0; config < 2; ++config) {
        InvariantQuery q;
        q.scope_ms = 3000.0;
        const double widen = config == 0 ? 0.5 : 0.1;
        q.lower_mm = m.base - amplitude - widen;
        q.upper_mm = m.base + amplitude + widen;
        const double ref = reference_probability(m, pcfg, q, 100000, 555 + config);
        c.require(ref > 0.02 && ref < 0.999,
                  "reference probability degenerate: " + std::to_string(ref));
        for (int trial = 0; trial < 50; ++trial) {
            const auto est = check_invariant(
                m, pcfg, q, SmcConfig{}, seed_for(999, config * 100 + trial));
            if (std::fabs(est.p_hat - ref) <= 0.05) ++in_tolerance;
            ++trials_total;
        }
    }
    c.require(in_tolerance >= 95,
              "only " + std::to_string(in_tolerance) + "/100 estimates in tolerance");
    char buf[96];
    std::snprintf(buf, sizeof(buf), "200 exact verdicts, %d/%d estimates within 0.05",
                  in_tolerance, trials_total);
    c.note(buf);
    return c;
}

SlotModelSet deterministic_set() {
    SlotModelSet set;
    set.slot_index = 0;
    MotionModel1D base = reference_global_model();
    base.base = 0.0;
    set.models = {base, base, base};
    set.models[1].base = 1.5;
    set.models[2].base = -1.5;
    set.fit_ok = {true, true, true};
    set.valid = true;
    return set;
}

Check criterion_slot_deadline() {
    Check c;
    const SlotModelSet set = deterministic_set();
    std::vector<BeamSpec> beams;
    for (int i = 0; i < 250; ++i) {
        BeamSpec beam;
        beam.id = 1000 + static_cast<std::uint64_t>(i);
        beam.remaining_ms = 1000.0 + i;
        beam.bounds = {{-8.0, 8.0}, {1.5 - 8.0, 1.5 + 8.0}, {-1.5 - 8.0, -1.5 + 8.0}};
        beams.push_back(beam);
    }

    // production configuration, full 3 s budget
    VerifyConfig cfg;
    cfg.deadline_ms = 3000.0;
    auto t0 = std::chrono::steady_clock::now();
    const SlotOutcome ok_outcome = verify_slot(beams, set, cfg);
    const double all_ms = seconds_since(t0) * 1000.0;
    c.require(ok_outcome.results.size() == 250, "missing results");
    for (const auto& res : ok_outcome.results) {
        c.require(res.completed, "beam not completed within 3 s");
        c.require(res.deliverable, "generous beam not deliverable");
    }
    c.require(all_ms < 3000.0, "slot took " + std::to_string(all_ms) + " ms");

    // every run simulated, 50 ms budget: must cut off and return promptly
    VerifyConfig tight = cfg;
    tight.smc.force_full_sampling = true;
    tight.deadline_ms = 50.0;
    t0 = std::chrono::steady_clock::now();
    const SlotOutcome cut = verify_slot(beams, set, tight);
    const double cut_ms = seconds_since(t0) * 1000.0;
    c.require(cut.results.size() == 250, "missing results under deadline");
    int incomplete = 0;
    for (const auto& res : cut.results) {
        if (!res.completed) {
            ++incomplete;
            c.require(!res.deliverable, "incomplete beam marked deliverable");
        }
    }
    c.require(incomplete > 0, "50 ms deadline did not bite");
    c.require(cut_ms < 100.0,
              "deadline return took " + std::to_string(cut_ms) + " ms");

    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "250 beams in %.0f ms; 50 ms cutoff returned in %.0f ms with "
                  "%d/250 incomplete",
                  all_ms, cut_ms, incomplete);
    c.note(buf);
    return c;
}

Check criterion_protocol_round_trip() {
    Check c;
    Rng rng(31415);
    for (int iter = 0; iter < 200 && c.ok; ++iter) {
        const AxisMode mode = iter % 2 == 0 ? AxisMode::one_d : AxisMode::three_d;
        BeamRequest request;
        request.slot_hint = static_cast<long>(rng.uniform(0.0, 400.0));
        request.mode = mode;
        const int count = 1 + static_cast<int>(rng.uniform(0.0, 20.0));
        for (int i = 0; i < count; ++i) {
            BeamSpec beam;
            beam.id = static_cast<std::uint64_t>(rng.uniform(1.0, 1e6));
            beam.remaining_ms = rng.uniform(1.0, 30000.0);
            if (mode == AxisMode::one_d) {
                const double thr = rng.uniform(0.0, 31.0);
                beam.bounds.push_back({-thr, thr});
            } else {
                for (int ax = 0; ax < 3; ++ax) {
                    const double lo = rng.uniform(-20.0, 5.0);
                    beam.bounds.push_back({lo, lo + rng.uniform(0.0, 25.0)});
                }
                beam.started = rng.uniform() < 0.4;
                beam.running = !beam.started && rng.uniform() < 0.2;
            }
            request.beams.push_back(beam);
        }
        const std::string wire = encode_request(request);
        c.require(encode_request(decode_request(wire)) == wire,
                  "request re-encoding differs");

        BeamResponse response;
        response.slot_index = request.slot_hint;
        response.gap = iter % 7 == 0;
        if (!response.gap) {
            for (const auto& beam : request.beams) {
                ResponseRow row;
                row.id = beam.id;
                for (int ax = 0; ax < 3; ++ax) row.p_axis[ax] = rng.uniform();
                row.combined_p =
                    std::min({row.p_axis[0], row.p_axis[1], row.p_axis[2]});
                row.completed = rng.uniform() < 0.9;
                row.deliverable = row.completed && row.combined_p >= 0.5;
                response.rows.push_back(row);
            }
        }
        const std::string wire2 = encode_response(response);
        c.require(encode_response(decode_response(wire2)) == wire2,
                  "response re-encoding differs");
    }
    c.note("200 randomized request/response round trips, byte exact");
    return c;
}

Check criterion_tier_behavior() {
    Check c;

    // self-consistent deterministic feed never invalidates
    {
        TraceGenSpec spec;
        spec.axes = {breathing_base_model()};
        spec.duration_ms = 80000.0;
        const MotionTrace feed = gen_motion_trace(spec, 21);
        OmcConfig cfg;
        cfg.axes = 1;
        OmcPipeline pipeline(feed, cfg, 4);
        int slots = 0;
        while (auto slot = pipeline.run_slot()) {
            c.require(slot->valid, "self-consistent feed invalidated a slot");
            c.require(slot->tier[0] == 0, "tier rose on a self-consistent feed");
            ++slots;
        }
        c.require(slots >= 18, "too few slots processed");
    }

    // scripted step change: rise then decay
    {
        TraceGenSpec spec;
        spec.axes = {breathing_base_model()};
        spec.duration_ms = 140000.0;
        TraceEvent step;
        step.kind = TraceEvent::Kind::baseline;
        step.at_ms = 50000.0;
        step.fade_ms = 0.0;
        step.value = 20.0;
        spec.events = {step};
        const MotionTrace feed = gen_motion_trace(spec, 22);

        OmcConfig cfg;
        cfg.axes = 1;
        OmcPipeline pipeline(feed, cfg, 4);
        std::vector<int> tiers;
        std::vector<bool> valid;
        while (auto slot = pipeline.run_slot()) {
            tiers.push_back(slot->tier[0]);
            valid.push_back(slot->valid);
        }
        c.require(tiers.size() > 25, "too few slots");

        const std::size_t pre = 9; // last slot fitted and validated pre-step
        for (std::size_t k = 0; k <= pre && k < tiers.size(); ++k)
            c.require(tiers[k] == 0 && valid[k], "pre-step slot not calm");
        c.require(tiers.size() > pre + 1 && tiers[pre + 1] == 1,
                  "step not caught at the first post-step validation");
        int peak = 0;
        for (std::size_t k = 1; k < tiers.size(); ++k) {
            c.require(std::abs(tiers[k] - tiers[k - 1]) <= 1,
                      "tier moved by more than one");
            c.require(tiers[k] >= 0 && tiers[k] <= 4, "tier out of range");
            peak = std::max(peak, tiers[k]);
        }
        c.require(peak >= 3, "tier never escalated to the invalid band");
        for (std::size_t k = 0; k < tiers.size(); ++k)
            c.require(valid[k] == (tiers[k] < 3), "validity does not track tiers");
        std::size_t recovered = tiers.size();
        for (std::size_t k = pre + 1; k < tiers.size(); ++k)
            if (tiers[k] == 0) {
                recovered = k;
                break;
            }
        c.require(recovered < tiers.size(), "tiers never decayed back to 0");
        // fit window clears the step by slot 17; allow the full decay ramp
        c.require(recovered <= 22, "recovery slower than refit + decay");
        for (std::size_t k = recovered; k < tiers.size(); ++k)
            c.require(valid[k], "slot invalid after recovery");

        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      "step caught at slot %zu, peak tier %d, calm again by slot %zu",
                      pre + 1, peak, recovered);
        c.note(buf);
    }

    // pipeline throughput: a 10 minute 1D trace in well under a minute
    {
        TraceGenSpec spec;
        spec.axes = {breathing_base_model()};
        spec.duration_ms = 600000.0;
        const MotionTrace feed = gen_motion_trace(spec, 23);
        OmcConfig cfg;
        cfg.axes = 1;
        OmcPipeline pipeline(feed, cfg, 4);
        const auto t0 = std::chrono::steady_clock::now();
        int slots = 0;
        while (auto slot = pipeline.run_slot()) ++slots;
        const double wall = seconds_since(t0);
        c.require(wall < 60.0, "10-minute replay too slow");
        char buf[96];
        std::snprintf(buf, sizeof(buf), "10 min trace: %d slots in %.1f s", slots,
                      wall);
        c.note(buf);
    }
    return c;
}

struct StudyOutput {
    CompareSummary summary;
    std::vector<TreatmentLog> extra_logs; // adversarial scenario logs
    double adversarial_reduction = 0.0;
    double adversarial_static_idle_s = 0.0;
    double adversarial_omc_idle_s = 0.0;
};

StudyOutput run_study() {
    StudyOutput out;

    // synthetic patient: calm breathing with one 60 s high-baseline episode
    // that blocks every low-threshold beam
    TraceGenSpec spec;
    spec.axes = {breathing_base_model()};
    spec.duration_ms = 1700000.0;
    TraceEvent up, down;
    up.kind = TraceEvent::Kind::baseline;
    up.at_ms = 120000.0;
    up.fade_ms = 10000.0;
    up.value = 25.0;
    down = up;
    down.at_ms = 190000.0;
    down.value = -25.0;
    spec.events = {up, down};
    const MotionTrace trace = gen_motion_trace(spec, 90210);

    CompareConfig cfg;
    cfg.repetitions = 30;
    cfg.beams_per_set = 100;
    cfg.seed = 424242;
    cfg.transitions.kind = TransitionModel::Kind::constant;
    cfg.transitions.constant_ms = 1500.0;
    cfg.session.origin_ms = 20000.0;
    cfg.session.max_session_ms = 1650000.0;
    cfg.server.omc.axes = 1;
    cfg.server.verify.workers = 2;
    cfg.server.seed = 7;
    out.summary = compare(figure_template(), trace, cfg);

    // adversarial 3-beam scenario: A blocked by a long episode while B and C
    // stay wide open
    TraceGenSpec adv;
    adv.axes = {breathing_base_model()};
    adv.duration_ms = 320000.0;
    TraceEvent a_up, a_down;
    a_up.kind = TraceEvent::Kind::baseline;
    a_up.at_ms = 10000.0;
    a_up.fade_ms = 10000.0;
    a_up.value = 6.0;
    a_down = a_up;
    a_down.at_ms = 110000.0;
    a_down.value = -6.0;
    adv.events = {a_up, a_down};
    const MotionTrace adv_trace = gen_motion_trace(adv, 31337);

    TreatmentPlan plan;
    {
        BeamSpec a, b, cbeam;
        a.id = 1;
        a.remaining_ms = 10000.0;
        a.bounds.push_back({-3.0, 3.0});
        b.id = 2;
        b.remaining_ms = 40000.0;
        b.bounds.push_back({-15.0, 15.0});
        cbeam.id = 3;
        cbeam.remaining_ms = 40000.0;
        cbeam.bounds.push_back({-15.0, 15.0});
        plan.beams = {a, b, cbeam};
        plan.transitions.kind = TransitionModel::Kind::constant;
        plan.transitions.constant_ms = 0.0;
    }
    SessionConfig session;
    session.origin_ms = 20000.0;
    session.max_session_ms = 290000.0;

    const TreatmentLog s_log = run_static(plan, adv_trace, session);
    out.extra_logs.push_back(s_log);

    ServerConfig scfg;
    scfg.host = "127.0.0.1";
    scfg.port = 0;
    scfg.omc.axes = 1;
    scfg.verify.workers = 2;
    scfg.seed = 99;
    BeamServer server(adv_trace, scfg);
    std::thread th([&server] { server.run(); });
    OmcClientConfig occ;
    occ.port = server.port();
    occ.session = session;
    const TreatmentLog o_log = run_omc(plan, adv_trace, occ);
    server.stop();
    th.join();
    out.extra_logs.push_back(o_log);

    out.adversarial_static_idle_s = s_log.idle_ms() / 1000.0;
    out.adversarial_omc_idle_s = o_log.idle_ms() / 1000.0;
    out.adversarial_reduction =
        s_log.idle_us > 0
            ? 100.0 * static_cast<double>(s_log.idle_us - o_log.idle_us) /
                  static_cast<double>(s_log.idle_us)
            : 0.0;
    return out;
}

Check criterion_idle_reduction(const StudyOutput& study) {
    Check c;
    const CompareSummary& s = study.summary;
    c.require(s.rows.size() == 30, "expected 30 repetitions");
    for (const auto& row : s.rows) {
        c.require(row.static_complete, "a static session did not complete");
        c.require(row.omc_complete, "an omc session did not complete");
    }
    c.require(s.mean_omc_idle_ms < s.mean_static_idle_ms,
              "mean omc idle time is not lower");
    c.require(s.sign_test_p < 0.05,
              "sign test p = " + std::to_string(s.sign_test_p));

    c.require(study.adversarial_reduction >= 50.0,
              "adversarial reduction " + std::to_string(study.adversarial_reduction) +
                  "% < 50%");
    c.require(study.adversarial_static_idle_s > 60.0,
              "static side did not wait out the episode");

    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "30 reps: idle %.1f s -> %.1f s (%.1f%%, wins %d/%d, p=%.2e); "
                  "3-beam scenario: %.1f s -> %.1f s (%.1f%%)",
                  s.mean_static_idle_ms / 1000.0, s.mean_omc_idle_ms / 1000.0,
                  s.reduction_pct, s.omc_wins,
                  static_cast<int>(s.rows.size()) - s.ties, s.sign_test_p,
                  study.adversarial_static_idle_s, study.adversarial_omc_idle_s,
                  study.adversarial_reduction);
    c.note(buf);
    return c;
}

Check criterion_conservation(const StudyOutput& study) {
    Check c;
    int sessions = 0;
    for (const auto& row : study.summary.rows) {
        c.require(row.static_makespan_us == row.static_beam_on_us +
                                                row.static_transition_us +
                                                row.static_idle_us,
                  "static session does not decompose exactly");
        c.require(row.omc_makespan_us ==
                      row.omc_beam_on_us + row.omc_transition_us + row.omc_idle_us,
                  "omc session does not decompose exactly");
        sessions += 2;
    }
    for (const auto& log : study.extra_logs) {
        c.require(log.makespan_us ==
                      log.beam_on_us + log.transition_us + log.idle_us,
                  "scenario session does not decompose exactly");
        ++sessions;
    }
    c.note(std::to_string(sessions) + " sessions decompose exactly");
    return c;
}

Check criterion_declarations() {
    Check c;
    const char* x_block =
        "const double period = 5088.0;\n"
        "const double drift = -0.0;\n"
        "\n"
        "double base = -3.6508;\n"
        "double a[4] = { -0.608, 0.205, 0.0744, -0.0764 };\n"
        "double b[4] = { 2.5745, -0.414, -0.0149, 0.0096 };\n";
    const char* y_block =
        "const double period = 5088.0;\n"
        "const double drift = 0.0;\n"
        "\n"
        "double base = 1.698;\n"
        "double a[4] = { 0.2631, -0.0887, -0.0322, 0.0331 };\n"
        "double b[4] = { -1.1144, 0.1792, 0.0065, -0.0041 };\n";
    const char* z_block =
        "const double period = 5088.0;\n"
        "const double drift = 0.0;\n"
        "\n"
        "double base = 1.8164;\n"
        "double a[4] = { 0.0757, -0.0255, -0.0093, 0.0095 };\n"
        "double b[4] = { -0.3202, 0.0516, 0.0019, -0.0012 };\n";
    const char* global_block =
        "const double accuracy = 100.0;\n"
        "\n"
        "const double period = 3469.0;\n"
        "const double drift = 0.0;\n"
        "\n"
        "double base = 2.5019;\n"
        "double a[4] = { -0.1959, 0.0295, -0.0022, -0.0169 };\n"
        "double b[4] = { -0.4023, 0.0294, 0.033, 0.013 };\n"
        "\n"
        "double v[4];\n"
        "double result;\n"
        "\n"
        "double time;\n"
        "broadcast chan step;\n"
        "\n"
        "double frequency = 2 * 3.14159265358979323846 / period;\n";

    const MotionModel1D x = parse_declarations(x_block);
    c.require(x.period_ms == 5088.0 && x.base == -3.6508 && x.a[0] == -0.608 &&
                  x.b[0] == 2.5745 && x.a[3] == -0.0764 && x.b[3] == 0.0096,
              "X axis values wrong");
    const MotionModel1D y = parse_declarations(y_block);
    c.require(y.base == 1.698 && y.a[0] == 0.2631 && y.b[0] == -1.1144,
              "Y axis values wrong");
    const MotionModel1D z = parse_declarations(z_block);
    c.require(z.base == 1.8164 && z.a[1] == -0.0255 && z.b[2] == 0.0019,
              "Z axis values wrong");
    const MotionModel1D g = parse_declarations(global_block);
    c.require(g.period_ms == 3469.0 && g.base == 2.5019 && g.accuracy == 100.0,
              "global block values wrong");

    for (const MotionModel1D& m : {x, y, z, g}) {
        const MotionModel1D back = parse_declarations(write_declarations(m));
        const auto bits = [](double v) {
            std::uint64_t u;
            std::memcpy(&u, &v, sizeof(u));
            return u;
        };
        bool same = bits(back.period_ms) == bits(m.period_ms) &&
                    bits(back.drift) == bits(m.drift) &&
                    bits(back.base) == bits(m.base) &&
                    bits(back.accuracy) == bits(m.accuracy) &&
                    bits(back.dt_ms) == bits(m.dt_ms);
        for (int k = 0; k < 4; ++k)
            same = same && bits(back.a[k]) == bits(m.a[k]) &&
                   bits(back.b[k]) == bits(m.b[k]);
        c.require(same, "round trip not bit-exact");
    }
    c.note("all four published blocks parse and round-trip bit-exactly");
    return c;
}

} // namespace

int main() {
    int failed = 0;
    const auto run = [&](int id, const char* name, const std::function<Check()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = fn();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        const double secs = seconds_since(t0);
        std::printf("[%s] %d. %s (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", id, name,
                    secs, c.detail.empty() ? "" : " -- ", c.detail.c_str());
        std::fflush(stdout);
        if (!c.ok) ++failed;
    };

    run(1, "formula fidelity", criterion_formula);
    run(2, "fit round-trip", criterion_fit_round_trip);
    run(3, "smc vs oracle", criterion_smc_oracle);
    run(4, "slot deadline", criterion_slot_deadline);
    run(5, "protocol round-trip", criterion_protocol_round_trip);
    run(6, "tier behavior", criterion_tier_behavior);

    // criteria 7 and 8 share one simulated study
    StudyOutput study;
    bool study_ok = true;
    std::string study_error;
    const auto t_study = std::chrono::steady_clock::now();
    try {
        study = run_study();
    } catch (const std::exception& e) {
        study_ok = false;
        study_error = e.what();
    }
    const double study_secs = seconds_since(t_study);
    if (!study_ok) {
        std::printf("[FAIL] 7. idle-time reduction (%.2f s) -- study failed: %s\n",
                    study_secs, study_error.c_str());
        std::printf("[FAIL] 8. conservation audit (%.2f s) -- study failed\n",
                    study_secs);
        failed += 2;
    } else {
        run(7, "idle-time reduction",
            [&] {
                Check c = criterion_idle_reduction(study);
                char buf[48];
                std::snprintf(buf, sizeof(buf), "study wall %.0f s", study_secs);
                c.note(buf);
                return c;
            });
        run(8, "conservation audit", [&] { return criterion_conservation(study); });
    }

    run(9, "declaration parsing", criterion_declarations);

    std::printf("SUMMARY: %d/9 criteria passed\n", 9 - failed);
    return failed == 0 ? 0 : 1;
}
