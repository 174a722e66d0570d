// beamsched: motion-model fitting, statistical beam verification and
// treatment-session simulation behind one command.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "beamsched/beam_service.hpp"
#include "beamsched/datagen.hpp"
#include "beamsched/errors.hpp"
#include "beamsched/io.hpp"
#include "beamsched/model_fit.hpp"
#include "beamsched/net.hpp"
#include "beamsched/omc_pipeline.hpp"
#include "beamsched/protocol.hpp"
#include "beamsched/rng.hpp"
#include "beamsched/server.hpp"
#include "beamsched/smc.hpp"
#include "beamsched/treatment.hpp"

namespace fs = std::filesystem;
using namespace beamsched;

namespace {

enum ExitCode {
    exit_ok = 0,
    exit_failure = 1,
    exit_usage = 2,
    exit_io = 3,
    exit_net = 4,
};

TraceEvent parse_event_flag(const std::string& text) {
    // kind:at_ms:fade_ms:value[:axis]
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t colon = text.find(':', start);
        if (colon == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, colon - start));
        start = colon + 1;
    }
    if (parts.size() != 4 && parts.size() != 5)
        throw CLI::ValidationError("--event expects kind:at_ms:fade_ms:value[:axis]");
    TraceEvent ev;
    if (parts[0] == "period") ev.kind = TraceEvent::Kind::period;
    else if (parts[0] == "amplitude") ev.kind = TraceEvent::Kind::amplitude;
    else if (parts[0] == "baseline") ev.kind = TraceEvent::Kind::baseline;
    else if (parts[0] == "noise") ev.kind = TraceEvent::Kind::noise;
    else throw CLI::ValidationError("unknown event kind '" + parts[0] + "'");
    try {
        ev.at_ms = std::stod(parts[1]);
        ev.fade_ms = std::stod(parts[2]);
        ev.value = std::stod(parts[3]);
        if (parts.size() == 5) ev.axis = std::stoi(parts[4]);
    } catch (const std::exception&) {
        throw CLI::ValidationError("malformed --event '" + text + "'");
    }
    return ev;
}

void echo_config(CLI::App& app, const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    write_file(dir + "/effective_config.ini", app.config_to_str(true, true));
}

// Session start shared by both scheduling modes: the first slot boundary
// after a full fit window of sensor history.
double session_origin(const MotionTrace& trace, double fit_window_ms) {
    return trace.t_ms.front() + fit_window_ms;
}

struct OmcFlags {
    double slot_interval_ms = 3000.0;
    double validity_window_ms = 6000.0;
    double validation_offset_ms = 1000.0;
    double fit_window_ms = 20000.0;
    double box_t_ms = 200.0;
    double box_x_mm = 1.5;
    double tier_threshold = 0.8;
    double accuracy = 100.0;
    int axes = 3;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--slot-interval", slot_interval_ms,
                        "Model refresh interval [ms]")
            ->capture_default_str();
        cmd->add_option("--validity-window", validity_window_ms,
                        "Model validity window [ms]")
            ->capture_default_str();
        cmd->add_option("--validation-offset", validation_offset_ms,
                        "Model self-check offset past the boundary [ms]")
            ->capture_default_str();
        cmd->add_option("--fit-window", fit_window_ms,
                        "Trailing sample window used for fitting [ms]")
            ->capture_default_str();
        cmd->add_option("--box-t", box_t_ms, "Validation box half-width in time [ms]")
            ->capture_default_str();
        cmd->add_option("--box-x", box_x_mm,
                        "Validation box half-width in position [mm]")
            ->capture_default_str();
        cmd->add_option("--tier-threshold", tier_threshold,
                        "Validation probability threshold tp")
            ->capture_default_str();
        cmd->add_option("--accuracy", accuracy,
                        "Model accuracy percentage (100 = deterministic)")
            ->capture_default_str();
    }

    OmcConfig to_config(int axis_count) const {
        OmcConfig cfg;
        cfg.slot_interval_ms = slot_interval_ms;
        cfg.validity_window_ms = validity_window_ms;
        cfg.validation_offset_ms = validation_offset_ms;
        cfg.fit_window_ms = fit_window_ms;
        cfg.box_t_plus_ms = box_t_ms;
        cfg.box_t_minus_ms = box_t_ms;
        cfg.box_x_plus_mm = box_x_mm;
        cfg.box_x_minus_mm = box_x_mm;
        cfg.tier_threshold = tier_threshold;
        cfg.accuracy = accuracy;
        cfg.axes = axis_count;
        return cfg;
    }
};

TransitionModel make_transitions(double constant_ms, const std::string& matrix_path,
                                 const std::string& coords_path, double speed,
                                 const std::vector<BeamSpec>& beams) {
    TransitionModel tm;
    if (!matrix_path.empty()) {
        tm.kind = TransitionModel::Kind::matrix;
        const std::string text = read_file(matrix_path);
        std::size_t pos = 0;
        long line_no = 0;
        while (pos < text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string::npos) nl = text.size();
            std::string_view line(text.data() + pos, nl - pos);
            pos = nl + 1;
            ++line_no;
            if (line.empty()) continue;
            std::vector<double> row;
            std::size_t field_start = 0;
            while (true) {
                const std::size_t comma = line.find(',', field_start);
                const auto field = comma == std::string_view::npos
                                       ? line.substr(field_start)
                                       : line.substr(field_start, comma - field_start);
                row.push_back(parse_double_field(field, line_no));
                if (comma == std::string_view::npos) break;
                field_start = comma + 1;
            }
            tm.matrix_ms.push_back(std::move(row));
        }
    } else if (!coords_path.empty()) {
        tm.kind = TransitionModel::Kind::coords;
        tm.speed_mm_per_ms = speed;
        const std::string text = read_file(coords_path);
        // ID,X[mm],Y[mm],Z[mm]; rows matched to beams by id
        std::map<std::uint64_t, std::array<double, 3>> by_id;
        std::size_t pos = 0;
        long line_no = 0;
        while (pos < text.size()) {
            std::size_t nl = text.find('\n', pos);
            if (nl == std::string::npos) nl = text.size();
            std::string_view line(text.data() + pos, nl - pos);
            pos = nl + 1;
            ++line_no;
            if (line.empty() || line_no == 1) continue; // header
            const auto f = split_csv(line, 4, line_no);
            std::array<double, 3> p{parse_double_field(f[1], line_no),
                                    parse_double_field(f[2], line_no),
                                    parse_double_field(f[3], line_no)};
            by_id[parse_u64_field(f[0], line_no)] = p;
        }
        for (const auto& beam : beams) {
            const auto it = by_id.find(beam.id);
            if (it == by_id.end())
                throw IoError("no coordinates for beam " + std::to_string(beam.id));
            tm.coords.push_back(it->second);
        }
    } else {
        tm.kind = TransitionModel::Kind::constant;
        tm.constant_ms = constant_ms;
    }
    return tm;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Respiratory-motion-aware beam scheduling toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config")->envname("OMC_BEAMSCHED_CONFIG");

    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "Base seed for all randomness")
        ->capture_default_str();

    // ---- gen-trace ----
    auto* gen_trace = app.add_subcommand("gen-trace", "Synthesize a motion trace");
    std::vector<std::string> gt_models;
    double gt_duration = 300000.0, gt_interval = 38.0, gt_noise = 0.0;
    std::vector<std::string> gt_events;
    std::string gt_out;
    gen_trace->add_option("--model", gt_models,
                          "Axis model declaration file (1 or 3 times)")
        ->required()
        ->expected(1, 3);
    gen_trace->add_option("--duration", gt_duration, "Trace length [ms]")
        ->capture_default_str();
    gen_trace->add_option("--interval", gt_interval, "Sample interval [ms]")
        ->capture_default_str();
    gen_trace->add_option("--noise", gt_noise, "Gaussian sample noise sigma [mm]")
        ->capture_default_str();
    gen_trace->add_option("--event", gt_events,
                          "Scripted change kind:at_ms:fade_ms:value[:axis]");
    gen_trace->add_option("--out", gt_out, "Output trace CSV")->required();

    // ---- gen-beams ----
    auto* gen_beams = app.add_subcommand("gen-beams", "Synthesize a beam list");
    std::string gb_template, gb_out;
    int gb_n = 100;
    gen_beams->add_option("--template", gb_template, "Template beam list CSV")
        ->required();
    gen_beams->add_option("--n", gb_n, "Number of beams")->capture_default_str();
    gen_beams->add_option("--out", gb_out, "Output beam list CSV")->required();

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand(
        "fit", "Replay a trace through the refit cadence, write per-slot models");
    std::string fit_trace, fit_outdir;
    OmcFlags fit_omc;
    fit_cmd->add_option("--trace", fit_trace, "Motion trace CSV")->required();
    fit_cmd->add_option("--outdir", fit_outdir, "Output directory")->required();
    fit_omc.add_to(fit_cmd);

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate one stochastic run");
    std::string sim_model, sim_out;
    double sim_horizon = 6000.0;
    std::optional<double> sim_accuracy;
    sim_cmd->add_option("--model", sim_model, "Model declaration file")->required();
    sim_cmd->add_option("--horizon", sim_horizon, "Run length [ms]")
        ->capture_default_str();
    sim_cmd->add_option("--accuracy", sim_accuracy,
                        "Override the model's accuracy percentage");
    sim_cmd->add_option("--out", sim_out, "Trajectory CSV (t[ms],x[mm])")->required();

    // ---- check ----
    auto* check_cmd =
        app.add_subcommand("check", "Estimate one property probability");
    std::string check_model;
    double check_scope = 3000.0;
    std::optional<double> check_lower, check_upper, check_accuracy;
    bool check_reach = false;
    double reach_horizon = 1200.0, reach_t_lo = 800.0, reach_t_hi = 1200.0;
    double reach_x_lo = -1.5, reach_x_hi = 1.5;
    double check_eps = 0.05, check_delta = 0.05;
    std::optional<double> check_deadline;
    check_cmd->add_option("--model", check_model, "Model declaration file")
        ->required();
    check_cmd->add_option("--scope", check_scope, "Invariant scope [ms]")
        ->capture_default_str();
    check_cmd->add_option("--lower", check_lower, "Invariant lower bound [mm]");
    check_cmd->add_option("--upper", check_upper, "Invariant upper bound [mm]");
    check_cmd->add_flag("--reach", check_reach,
                        "Check the reach-box property instead of the invariant");
    check_cmd->add_option("--horizon", reach_horizon, "Reach horizon [ms]");
    check_cmd->add_option("--t-lo", reach_t_lo, "Reach box earliest time [ms]");
    check_cmd->add_option("--t-hi", reach_t_hi, "Reach box latest time [ms]");
    check_cmd->add_option("--x-lo", reach_x_lo, "Reach box lower position [mm]");
    check_cmd->add_option("--x-hi", reach_x_hi, "Reach box upper position [mm]");
    check_cmd->add_option("--accuracy", check_accuracy, "Override model accuracy");
    check_cmd->add_option("--epsilon", check_eps, "Estimate half-width")
        ->capture_default_str();
    check_cmd->add_option("--delta", check_delta, "Confidence error")
        ->capture_default_str();
    check_cmd->add_option("--deadline", check_deadline, "Wall-clock budget [ms]");

    // ---- serve ----
    auto* serve_cmd = app.add_subcommand("serve", "Run the verification service");
    std::string srv_trace, srv_host = "127.0.0.1";
    std::uint16_t srv_port = 9474;
    std::string srv_mode = "3d";
    double srv_cutoff = 0.5, srv_scope = 3000.0, srv_deadline = 3000.0;
    int srv_workers = 0;
    bool srv_realtime = false;
    bool srv_once = false;
    bool srv_full_sampling = false;
    OmcFlags srv_omc;
    serve_cmd->add_option("--trace", srv_trace, "Sensor feed trace CSV")->required();
    serve_cmd->add_option("--host", srv_host, "Listen address")->capture_default_str();
    serve_cmd->add_option("--port", srv_port, "Listen port")->capture_default_str();
    serve_cmd->add_option("--mode", srv_mode, "Axis mode: 1d or 3d")
        ->check(CLI::IsMember({"1d", "3d"}))
        ->capture_default_str();
    serve_cmd->add_option("--cutoff", srv_cutoff, "Deliverability cutoff probability")
        ->capture_default_str();
    serve_cmd->add_option("--scope", srv_scope, "Beam query scope [ms]")
        ->capture_default_str();
    serve_cmd->add_option("--deadline", srv_deadline, "Per-slot deadline [ms]")
        ->capture_default_str();
    serve_cmd->add_option("--workers", srv_workers,
                          "Verification worker count (0 = hardware)")
        ->capture_default_str();
    serve_cmd->add_flag("--realtime", srv_realtime,
                        "Lock the slot clock to wall time");
    serve_cmd->add_flag("--once", srv_once, "Serve one session, then exit");
    serve_cmd->add_flag("--full-sampling", srv_full_sampling,
                        "Run every sample even for deterministic models");
    srv_omc.add_to(serve_cmd);

    // ---- treat ----
    auto* treat_cmd = app.add_subcommand("treat", "Simulate a treatment session");
    std::string treat_mode;
    std::string tr_beams, tr_trace, tr_outdir;
    std::string tr_host = "127.0.0.1";
    std::uint16_t tr_port = 9474;
    double tr_transition = 1500.0;
    std::string tr_matrix, tr_coords;
    double tr_speed = 1.0;
    double tr_max_session = 4.0 * 3600.0 * 1000.0;
    double tr_fit_window = 20000.0;
    double tr_slot_interval = 3000.0;
    treat_cmd->add_option("mode", treat_mode, "static or omc")
        ->required()
        ->check(CLI::IsMember({"static", "omc"}));
    treat_cmd->add_option("--beams", tr_beams, "Beam list CSV")->required();
    treat_cmd->add_option("--trace", tr_trace, "Ground-truth motion trace CSV")
        ->required();
    treat_cmd->add_option("--outdir", tr_outdir, "Output directory")->required();
    treat_cmd->add_option("--host", tr_host, "Verification service host")
        ->capture_default_str();
    treat_cmd->add_option("--port", tr_port, "Verification service port")
        ->capture_default_str();
    treat_cmd->add_option("--transition-ms", tr_transition,
                          "Constant robot transition time [ms]")
        ->capture_default_str();
    treat_cmd->add_option("--transition-matrix", tr_matrix,
                          "CSV matrix of per-pair transition times [ms]");
    treat_cmd->add_option("--beam-coords", tr_coords,
                          "Beam coordinate CSV (ID,X[mm],Y[mm],Z[mm])");
    treat_cmd->add_option("--speed", tr_speed, "Robot speed [mm/ms] for coordinates")
        ->capture_default_str();
    treat_cmd->add_option("--max-session", tr_max_session,
                          "Give up after this much session time [ms]")
        ->capture_default_str();
    treat_cmd->add_option("--fit-window", tr_fit_window,
                          "Fit window [ms]; the session starts after this warmup")
        ->capture_default_str();
    treat_cmd->add_option("--slot-interval", tr_slot_interval, "Slot cadence [ms]")
        ->capture_default_str();

    // ---- compare ----
    auto* cmp_cmd = app.add_subcommand(
        "compare", "Repeated static vs omc study over synthesized beam sets");
    std::string cmp_template, cmp_trace, cmp_outdir;
    int cmp_reps = 30, cmp_n = 100;
    double cmp_transition = 1500.0;
    double cmp_cutoff = 0.5, cmp_scope = 3000.0, cmp_deadline = 3000.0;
    double cmp_max_session = 4.0 * 3600.0 * 1000.0;
    int cmp_workers = 0;
    OmcFlags cmp_omc;
    cmp_cmd->add_option("--template", cmp_template, "Template beam list CSV")
        ->required();
    cmp_cmd->add_option("--trace", cmp_trace, "Ground-truth motion trace CSV")
        ->required();
    cmp_cmd->add_option("--outdir", cmp_outdir, "Output directory")->required();
    cmp_cmd->add_option("--reps", cmp_reps, "Repetitions")->capture_default_str();
    cmp_cmd->add_option("--n", cmp_n, "Beams per synthesized set")
        ->capture_default_str();
    cmp_cmd->add_option("--transition-ms", cmp_transition,
                        "Constant robot transition time [ms]")
        ->capture_default_str();
    cmp_cmd->add_option("--cutoff", cmp_cutoff, "Deliverability cutoff")
        ->capture_default_str();
    cmp_cmd->add_option("--scope", cmp_scope, "Beam query scope [ms]")
        ->capture_default_str();
    cmp_cmd->add_option("--deadline", cmp_deadline, "Per-slot deadline [ms]")
        ->capture_default_str();
    cmp_cmd->add_option("--workers", cmp_workers, "Verification workers")
        ->capture_default_str();
    cmp_cmd->add_option("--max-session", cmp_max_session,
                        "Give up after this much session time [ms]")
        ->capture_default_str();
    cmp_omc.add_to(cmp_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (gen_trace->parsed()) {
            TraceGenSpec spec;
            for (const auto& path : gt_models)
                spec.axes.push_back(read_declarations_file(path));
            spec.duration_ms = gt_duration;
            spec.sample_interval_ms = gt_interval;
            spec.noise_sigma = gt_noise;
            for (const auto& text : gt_events)
                spec.events.push_back(parse_event_flag(text));
            write_motion_trace_file(gt_out, gen_motion_trace(spec, seed));
            std::cout << "wrote " << gt_out << "\n";
        } else if (gen_beams->parsed()) {
            const BeamListFile tmpl = read_beam_list_file(gb_template);
            write_beam_list_file(gb_out, gen_beam_list(tmpl, gb_n, seed));
            std::cout << "wrote " << gb_out << "\n";
        } else if (fit_cmd->parsed()) {
            const MotionTrace trace = read_motion_trace_file(fit_trace);
            const OmcConfig cfg = fit_omc.to_config(trace.axes);
            OmcPipeline pipeline(trace, cfg, seed);
            std::error_code ec;
            fs::create_directories(fit_outdir, ec);
            echo_config(app, fit_outdir);
            std::string summary =
                "slot,created_at_ms,valid,fit_x,fit_y,fit_z,p_x,p_y,p_z,tier_x,tier_y,"
                "tier_z\n";
            const char axis_names[3] = {'x', 'y', 'z'};
            while (auto slot = pipeline.run_slot()) {
                for (int ax = 0; ax < cfg.axes; ++ax) {
                    if (!slot->fit_ok[ax]) continue;
                    char name[64];
                    std::snprintf(name, sizeof(name), "slot_%06ld_%c.decl",
                                  slot->slot_index, axis_names[ax]);
                    write_declarations_file(fit_outdir + "/" + name, slot->models[ax]);
                }
                summary += std::to_string(slot->slot_index) + "," +
                           format_double(slot->created_at_ms) + "," +
                           (slot->valid ? "1" : "0");
                for (int ax = 0; ax < 3; ++ax)
                    summary += std::string(",") + (slot->fit_ok[ax] ? "1" : "0");
                for (int ax = 0; ax < 3; ++ax)
                    summary += "," + format_double(slot->validity_prob[ax]);
                for (int ax = 0; ax < 3; ++ax)
                    summary += "," + std::to_string(slot->tier[ax]);
                summary += "\n";
            }
            write_file(fit_outdir + "/slots.csv", summary);
            std::cout << "processed " << pipeline.slots_processed() << " slots into "
                      << fit_outdir << "\n";
        } else if (sim_cmd->parsed()) {
            MotionModel1D model = read_declarations_file(sim_model);
            if (sim_accuracy) model.accuracy = *sim_accuracy;
            const auto cfg = derive_perturbation(model.accuracy);
            const Trajectory traj = simulate(model, cfg, sim_horizon, seed);
            MotionTrace out;
            out.axes = 1;
            for (std::size_t i = 0; i < traj.positions.size(); ++i) {
                out.t_ms.push_back(traj.time_at(i));
                out.axis[0].push_back(traj.positions[i]);
            }
            write_motion_trace_file(sim_out, out);
            std::cout << "wrote " << sim_out << "\n";
        } else if (check_cmd->parsed()) {
            MotionModel1D model = read_declarations_file(check_model);
            if (check_accuracy) model.accuracy = *check_accuracy;
            const auto pcfg = derive_perturbation(model.accuracy);
            SmcConfig smc;
            smc.epsilon = check_eps;
            smc.delta = check_delta;
            smc.deadline_ms = check_deadline;
            ProbabilityEstimate est;
            if (check_reach) {
                ReachBoxQuery q;
                q.horizon_ms = reach_horizon;
                q.t_lo_ms = reach_t_lo;
                q.t_hi_ms = reach_t_hi;
                q.x_lo_mm = reach_x_lo;
                q.x_hi_mm = reach_x_hi;
                est = check_reach_box(model, pcfg, q, smc, seed);
            } else {
                if (!check_lower || !check_upper)
                    throw CLI::ValidationError("--lower and --upper are required");
                InvariantQuery q{check_scope, *check_lower, *check_upper};
                est = check_invariant(model, pcfg, q, smc, seed);
            }
            std::cout << format_double(est.p_hat) << "\n";
            if (!est.completed) {
                std::cerr << "incomplete: deadline hit after " << est.runs_used
                          << " runs\n";
                return exit_failure;
            }
        } else if (serve_cmd->parsed()) {
            const MotionTrace trace = read_motion_trace_file(srv_trace);
            ServerConfig cfg;
            cfg.host = srv_host;
            cfg.port = srv_port;
            cfg.omc = srv_omc.to_config(srv_mode == "1d" ? 1 : 3);
            cfg.verify.cutoff = srv_cutoff;
            cfg.verify.scope_ms = srv_scope;
            cfg.verify.deadline_ms = srv_deadline;
            cfg.verify.workers = srv_workers;
            cfg.verify.smc.force_full_sampling = srv_full_sampling;
            cfg.realtime = srv_realtime;
            cfg.seed = seed;
            BeamServer server(trace, cfg);
            std::cout << "listening on " << srv_host << ":" << server.port()
                      << std::endl;
            if (srv_once) {
                server.run_once();
            } else {
                server.run();
            }
        } else if (treat_cmd->parsed()) {
            const BeamListFile list = read_beam_list_file(tr_beams);
            const MotionTrace trace = read_motion_trace_file(tr_trace);
            TreatmentPlan plan;
            plan.beams = list.beams;
            plan.transitions =
                make_transitions(tr_transition, tr_matrix, tr_coords, tr_speed,
                                 plan.beams);
            SessionConfig session;
            session.origin_ms = session_origin(trace, tr_fit_window);
            session.max_session_ms = tr_max_session;

            TreatmentLog log;
            if (treat_mode == "static") {
                log = run_static(plan, trace, session);
            } else {
                OmcClientConfig occ;
                occ.host = tr_host;
                occ.port = tr_port;
                occ.slot_interval_ms = tr_slot_interval;
                occ.session = session;
                log = run_omc(plan, trace, occ);
            }
            std::error_code ec;
            fs::create_directories(tr_outdir, ec);
            echo_config(app, tr_outdir);
            write_file(tr_outdir + "/events.csv", log.events_csv());
            const std::string summary = log.summary_text("treat " + treat_mode);
            write_file(tr_outdir + "/summary.txt", summary);
            std::cout << summary;
            if (!log.complete) return exit_failure;
        } else if (cmp_cmd->parsed()) {
            const BeamListFile tmpl = read_beam_list_file(cmp_template);
            const MotionTrace trace = read_motion_trace_file(cmp_trace);
            CompareConfig cfg;
            cfg.repetitions = cmp_reps;
            cfg.beams_per_set = cmp_n;
            cfg.seed = seed;
            cfg.transitions.kind = TransitionModel::Kind::constant;
            cfg.transitions.constant_ms = cmp_transition;
            cfg.session.origin_ms = session_origin(trace, cmp_omc.fit_window_ms);
            cfg.session.max_session_ms = cmp_max_session;
            cfg.server.omc =
                cmp_omc.to_config(tmpl.mode == AxisMode::one_d ? 1 : 3);
            cfg.server.verify.cutoff = cmp_cutoff;
            cfg.server.verify.scope_ms = cmp_scope;
            cfg.server.verify.deadline_ms = cmp_deadline;
            cfg.server.verify.workers = cmp_workers;
            cfg.server.seed = seed;
            const CompareSummary summary = compare(tmpl, trace, cfg);
            std::error_code ec;
            fs::create_directories(cmp_outdir, ec);
            echo_config(app, cmp_outdir);
            write_file(cmp_outdir + "/table.csv", summary.table_csv());
            write_file(cmp_outdir + "/summary.txt", summary.summary_text());
            std::cout << summary.summary_text();
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const NetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_net;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_ok;
}
