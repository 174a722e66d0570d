#include "beamsched/treatment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "beamsched/datagen.hpp"
#include "beamsched/net.hpp"
#include "beamsched/protocol.hpp"
#include "beamsched/rng.hpp"

namespace beamsched {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

std::int64_t to_us(double ms) { return std::llround(ms * 1000.0); }

} // namespace

double TransitionModel::between_ms(std::size_t from, std::size_t to) const {
    if (from == to) return 0.0;
    switch (kind) {
    case Kind::constant:
        return constant_ms;
    case Kind::matrix:
        return matrix_ms[from][to];
    case Kind::coords: {
        const auto& p = coords[from];
        const auto& q = coords[to];
        const double dx = p[0] - q[0];
        const double dy = p[1] - q[1];
        const double dz = p[2] - q[2];
        return std::sqrt(dx * dx + dy * dy + dz * dz) / speed_mm_per_ms;
    }
    }
    return 0.0;
}

void TransitionModel::validate(std::size_t beam_count) const {
    switch (kind) {
    case Kind::constant:
        if (constant_ms < 0.0)
            throw std::invalid_argument("transition time must be >= 0");
        break;
    case Kind::matrix:
        if (matrix_ms.size() != beam_count)
            throw std::invalid_argument("transition matrix size mismatch");
        for (std::size_t i = 0; i < beam_count; ++i) {
            if (matrix_ms[i].size() != beam_count)
                throw std::invalid_argument("transition matrix not square");
            for (std::size_t j = 0; j < beam_count; ++j) {
                if (matrix_ms[i][j] < 0.0)
                    throw std::invalid_argument("transition time must be >= 0");
                if (matrix_ms[i][j] != matrix_ms[j][i])
                    throw std::invalid_argument("transition matrix must be symmetric");
            }
        }
        break;
    case Kind::coords:
        if (coords.size() != beam_count)
            throw std::invalid_argument("coordinate count mismatch");
        if (!(speed_mm_per_ms > 0.0))
            throw std::invalid_argument("speed must be > 0");
        break;
    }
}

namespace {

// Greedy nearest-neighbor over a subset of beams. position == kNone means
// the robot has not moved yet, in which case every transition is free and
// the tie-break (input order) decides.
std::vector<std::size_t> greedy_from(const TreatmentPlan& plan, std::size_t position,
                                     const std::vector<std::size_t>& candidates) {
    std::vector<std::size_t> order;
    order.reserve(candidates.size());
    std::vector<bool> used(candidates.size(), false);
    std::size_t at = position;
    for (std::size_t n = 0; n < candidates.size(); ++n) {
        std::size_t best = kNone;
        double best_cost = 0.0;
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if (used[c]) continue;
            const double cost =
                at == kNone ? 0.0 : plan.transitions.between_ms(at, candidates[c]);
            if (best == kNone || cost < best_cost) {
                best = c;
                best_cost = cost;
            }
        }
        used[best] = true;
        order.push_back(candidates[best]);
        at = candidates[best];
    }
    return order;
}

} // namespace

std::vector<std::size_t> static_order(const TreatmentPlan& plan,
                                      std::size_t start_index) {
    const std::size_t n = plan.beams.size();
    plan.transitions.validate(n);
    if (n == 0) return {};
    if (start_index >= n)
        throw std::invalid_argument("static_order: start index out of range");

    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i)
        if (i != start_index) rest.push_back(i);
    std::vector<std::size_t> order{start_index};
    const auto tail = greedy_from(plan, start_index, rest);
    order.insert(order.end(), tail.begin(), tail.end());
    return order;
}

const char* to_string(TreatmentEvent::Kind kind) {
    switch (kind) {
    case TreatmentEvent::Kind::beam_start: return "start";
    case TreatmentEvent::Kind::beam_halt: return "halt";
    case TreatmentEvent::Kind::beam_resume: return "resume";
    case TreatmentEvent::Kind::beam_finish: return "finish";
    case TreatmentEvent::Kind::verdict_stop: return "verdict_stop";
    case TreatmentEvent::Kind::session_end: return "session_end";
    }
    return "?";
}

std::string TreatmentLog::events_csv() const {
    std::string out = "t[ms],event,beam\n";
    for (const auto& ev : events) {
        out += format_double(ev.t_ms);
        out += ',';
        out += to_string(ev.kind);
        out += ',';
        out += std::to_string(ev.beam_id);
        out += '\n';
    }
    return out;
}

std::string TreatmentLog::summary_text(const std::string& label) const {
    std::ostringstream s;
    s << label << ": "
      << (complete ? "complete" : aborted ? "ABORTED" : "INCOMPLETE") << ", beams "
      << beams_completed << "/" << beams_total << ", makespan "
      << makespan_ms() / 1000.0 << " s = beam-on " << beam_on_ms() / 1000.0
      << " s + transition " << transition_ms() / 1000.0 << " s + idle "
      << idle_ms() / 1000.0 << " s, interruptions " << interruptions << "\n";
    return s.str();
}

namespace {

// Shared per-session bookkeeping for both scheduling modes.
struct Engine {
    const TreatmentPlan& plan;
    const MotionTrace& trace;
    TreatmentLog log;

    std::vector<std::int64_t> t_us;
    std::vector<std::int64_t> rem_us;
    std::vector<bool> started;
    std::int64_t origin_us = 0;
    std::int64_t end_guard_us = 0;
    std::int64_t cursor = 0;

    std::size_t current = kNone;  // beam being delivered or moved to
    std::size_t robot_at = kNone; // last position the robot was sent to
    std::int64_t trans_rem = 0;
    bool delivering = false;
    int done_count = 0;

    Engine(const TreatmentPlan& p, const MotionTrace& tr, const SessionConfig& s)
        : plan(p), trace(tr) {
        plan.transitions.validate(plan.beams.size());
        if (trace.size() < 2)
            throw std::invalid_argument("treatment: trace too short");
        for (const auto& beam : plan.beams) {
            if (!(beam.remaining_ms > 0.0))
                throw std::invalid_argument("treatment: delivery times must be > 0");
            if (beam.bounds.size() != static_cast<std::size_t>(trace.axes) &&
                !(beam.bounds.size() == 1 && trace.axes == 1))
                throw std::invalid_argument(
                    "treatment: beam bounds do not match trace axes");
        }
        t_us.reserve(trace.size());
        for (double t : trace.t_ms) t_us.push_back(to_us(t));
        rem_us.reserve(plan.beams.size());
        for (const auto& beam : plan.beams) rem_us.push_back(to_us(beam.remaining_ms));
        started.assign(plan.beams.size(), false);
        origin_us = to_us(s.origin_ms);
        if (origin_us < t_us.front() || origin_us >= t_us.back())
            throw std::invalid_argument("treatment: session origin outside trace");
        end_guard_us = origin_us + to_us(s.max_session_ms);
        cursor = origin_us;
        log.beams_total = static_cast<int>(plan.beams.size());
        log.session_origin_ms = s.origin_ms;
    }

    void event(TreatmentEvent::Kind kind, std::size_t beam) {
        TreatmentEvent ev;
        ev.t_ms = static_cast<double>(cursor - origin_us) / 1000.0;
        ev.beam_id = beam == kNone ? 0 : plan.beams[beam].id;
        ev.kind = kind;
        log.events.push_back(ev);
    }

    bool feasible(std::size_t beam, const std::array<double, 3>& pos) const {
        return plan.beams[beam].feasible_at(pos.data());
    }

    void start_delivery(std::size_t beam) {
        event(started[beam] ? TreatmentEvent::Kind::beam_resume
                            : TreatmentEvent::Kind::beam_start,
              beam);
        started[beam] = true;
        delivering = true;
    }

    // Delivers for up to `avail` microseconds; returns consumed time.
    std::int64_t deliver(std::int64_t avail) {
        const std::int64_t use = std::min(avail, rem_us[current]);
        log.beam_on_us += use;
        rem_us[current] -= use;
        cursor += use;
        if (rem_us[current] == 0) {
            event(TreatmentEvent::Kind::beam_finish, current);
            delivering = false;
            ++done_count;
            log.beams_completed = done_count;
        }
        return use;
    }

    void finish(bool completed_all) {
        log.makespan_us = cursor - origin_us;
        log.complete = completed_all;
        event(TreatmentEvent::Kind::session_end, kNone);
    }
};

} // namespace

TreatmentLog run_static(const TreatmentPlan& plan, const MotionTrace& trace,
                        const SessionConfig& session) {
    Engine eng(plan, trace, session);
    const std::vector<std::size_t> order = static_order(plan, 0);
    if (order.empty()) {
        eng.finish(true);
        return eng.log;
    }

    std::size_t oi = 0;
    eng.current = order[0];
    bool done = false;

    for (std::size_t i = 0; i + 1 < eng.t_us.size() && !done; ++i) {
        if (eng.t_us[i + 1] <= eng.cursor) continue;
        const std::int64_t slice_end = std::min(eng.t_us[i + 1], eng.end_guard_us);
        const auto pos = trace.position(i);

        while (eng.cursor < slice_end && !done) {
            const std::int64_t avail = slice_end - eng.cursor;
            if (eng.trans_rem > 0) {
                const std::int64_t use = std::min(avail, eng.trans_rem);
                eng.trans_rem -= use;
                eng.log.transition_us += use;
                eng.cursor += use;
                continue;
            }
            if (eng.feasible(eng.current, pos)) {
                if (!eng.delivering) eng.start_delivery(eng.current);
                eng.deliver(avail);
                if (eng.rem_us[eng.current] == 0) {
                    if (++oi >= order.size()) {
                        done = true;
                    } else {
                        const std::size_t next = order[oi];
                        eng.trans_rem =
                            to_us(plan.transitions.between_ms(eng.current, next));
                        eng.current = next;
                    }
                }
            } else {
                if (eng.delivering) {
                    ++eng.log.interruptions;
                    eng.event(TreatmentEvent::Kind::beam_halt, eng.current);
                    eng.delivering = false;
                }
                eng.log.idle_us += avail;
                eng.cursor += avail;
            }
        }
        if (!done && eng.cursor >= eng.end_guard_us) break;
    }

    eng.finish(done);
    return eng.log;
}

TreatmentLog run_omc(const TreatmentPlan& plan, const MotionTrace& trace,
                     const OmcClientConfig& cfg) {
    Engine eng(plan, trace, cfg.session);
    const std::size_t n = plan.beams.size();
    if (n == 0) {
        eng.finish(true);
        return eng.log;
    }
    const AxisMode mode =
        plan.beams.front().bounds.size() == 1 ? AxisMode::one_d : AxisMode::three_d;

    std::map<std::uint64_t, std::size_t> index_of;
    for (std::size_t i = 0; i < n; ++i) index_of[plan.beams[i].id] = i;

    Connection conn = connect_to(cfg.host, cfg.port);

    const std::int64_t slot_us = to_us(cfg.slot_interval_ms);
    long next_slot = 0;
    bool gap_mode = true;
    std::vector<char> deliverable(n, 0);

    auto exchange = [&](long slot_hint) {
        BeamRequest request;
        request.slot_hint = slot_hint;
        request.mode = mode;
        for (std::size_t i = 0; i < n; ++i) {
            if (eng.rem_us[i] == 0) continue;
            BeamSpec beam = plan.beams[i];
            beam.remaining_ms = static_cast<double>(eng.rem_us[i]) / 1000.0;
            beam.started = eng.started[i];
            beam.running = eng.delivering && eng.current == i;
            request.beams.push_back(std::move(beam));
        }
        conn.write_all(encode_request(request));

        auto header_line = conn.read_line();
        if (!header_line) throw NetError("verification service closed the connection");
        const ResponseHeader header = parse_response_header(*header_line);
        std::fill(deliverable.begin(), deliverable.end(), 0);
        if (header.gap) {
            gap_mode = true;
        } else {
            gap_mode = false;
            for (std::size_t j = 0; j < request.beams.size(); ++j) {
                auto row_line = conn.read_line();
                if (!row_line)
                    throw NetError("verification service closed the connection");
                const ResponseRow row =
                    parse_response_line(*row_line, static_cast<long>(j + 2));
                const auto it = index_of.find(row.id);
                if (it != index_of.end())
                    deliverable[it->second] = row.deliverable ? 1 : 0;
            }
        }
        // a running or pending beam that lost its verdict is stopped safely
        if (eng.current != kNone && (gap_mode || !deliverable[eng.current])) {
            if (eng.delivering) {
                eng.event(TreatmentEvent::Kind::verdict_stop, eng.current);
                eng.delivering = false;
            }
            eng.current = kNone;
            eng.trans_rem = 0;
        }
    };

    auto pick = [&](const std::array<double, 3>& pos) -> std::size_t {
        std::vector<std::size_t> outstanding;
        for (std::size_t i = 0; i < n; ++i)
            if (eng.rem_us[i] > 0) outstanding.push_back(i);
        // continue the current robot position's cheapest tour
        for (std::size_t i : greedy_from(plan, eng.robot_at, outstanding))
            if (deliverable[i] && eng.feasible(i, pos)) return i;
        return kNone;
    };

    bool done = false;
    try {
    for (std::size_t i = 0; i + 1 < eng.t_us.size() && !done; ++i) {
        if (eng.t_us[i + 1] <= eng.cursor) continue;
        const std::int64_t slice_end = std::min(eng.t_us[i + 1], eng.end_guard_us);
        const auto pos = trace.position(i);

        while (eng.cursor < slice_end && !done) {
            // slot cadence: exchange exactly at each boundary
            while (eng.origin_us + next_slot * slot_us <= eng.cursor) {
                exchange(next_slot);
                ++next_slot;
            }
            const std::int64_t next_boundary = eng.origin_us + next_slot * slot_us;
            const std::int64_t avail = std::min(slice_end, next_boundary) - eng.cursor;
            if (avail <= 0) continue;

            if (gap_mode) { // no valid model: pause, fail-safe
                eng.log.idle_us += avail;
                eng.cursor += avail;
                continue;
            }
            if (eng.trans_rem > 0) {
                const std::int64_t use = std::min(avail, eng.trans_rem);
                eng.trans_rem -= use;
                eng.log.transition_us += use;
                eng.cursor += use;
                continue;
            }
            if (eng.current == kNone) {
                const std::size_t choice = pick(pos);
                if (choice == kNone) {
                    eng.log.idle_us += avail;
                    eng.cursor += avail;
                    continue;
                }
                eng.current = choice;
                if (eng.robot_at != kNone && eng.robot_at != choice) {
                    eng.trans_rem =
                        to_us(plan.transitions.between_ms(eng.robot_at, choice));
                }
                eng.robot_at = choice;
                continue;
            }
            if (!eng.feasible(eng.current, pos)) {
                if (eng.delivering) {
                    // actual violation: halt and start the cycle again
                    ++eng.log.interruptions;
                    eng.event(TreatmentEvent::Kind::beam_halt, eng.current);
                    eng.delivering = false;
                    eng.current = kNone;
                    exchange(next_slot - 1);
                } else {
                    eng.current = kNone; // arrived blocked; pick something else
                }
                continue;
            }
            if (!eng.delivering) eng.start_delivery(eng.current);
            eng.deliver(avail);
            if (eng.rem_us[eng.current] == 0) {
                eng.current = kNone;
                done = eng.done_count == static_cast<int>(n);
            }
        }
        if (!done && eng.cursor >= eng.end_guard_us) break;
    }
    } catch (const NetError&) {
        // service went away mid-session: abort with the partial log
        eng.log.aborted = true;
    }

    eng.finish(done);
    return eng.log;
}

std::string CompareSummary::table_csv() const {
    std::string out =
        "rep,static_idle_ms,omc_idle_ms,static_interruptions,omc_interruptions,"
        "static_makespan_ms,omc_makespan_ms,static_complete,omc_complete\n";
    for (const auto& row : rows) {
        out += std::to_string(row.rep);
        out += ',';
        out += format_double(row.static_idle_ms);
        out += ',';
        out += format_double(row.omc_idle_ms);
        out += ',';
        out += std::to_string(row.static_interruptions);
        out += ',';
        out += std::to_string(row.omc_interruptions);
        out += ',';
        out += format_double(row.static_makespan_ms);
        out += ',';
        out += format_double(row.omc_makespan_ms);
        out += ',';
        out += row.static_complete ? "1" : "0";
        out += ',';
        out += row.omc_complete ? "1" : "0";
        out += '\n';
    }
    return out;
}

std::string CompareSummary::summary_text() const {
    std::ostringstream s;
    s << "repetitions: " << rows.size() << "\n";
    s << "mean idle time: static " << mean_static_idle_ms / 1000.0 << " s (sd "
      << sd_static_idle_ms / 1000.0 << "), omc " << mean_omc_idle_ms / 1000.0
      << " s (sd " << sd_omc_idle_ms / 1000.0 << ")\n";
    s << "idle time reduction: " << reduction_pct << " %\n";
    s << "omc wins: " << omc_wins << "/" << (rows.size() - static_cast<std::size_t>(ties))
      << " (ties " << ties << "), one-sided sign test p = " << sign_test_p << "\n";
    return s.str();
}

double sign_test_tail(int wins, int n) {
    if (n <= 0) return 1.0;
    double tail = 0.0;
    for (int k = wins; k <= n; ++k) {
        const double log_c = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                             std::lgamma(n - k + 1.0);
        tail += std::exp(log_c - n * std::log(2.0));
    }
    return std::min(1.0, tail);
}

CompareSummary compare(const BeamListFile& beam_template, const MotionTrace& trace,
                       const CompareConfig& cfg) {
    if (cfg.repetitions < 1)
        throw std::invalid_argument("compare: repetitions must be >= 1");

    ServerConfig scfg = cfg.server;
    scfg.host = "127.0.0.1";
    scfg.port = 0; // ephemeral
    BeamServer server(trace, scfg);
    std::thread server_thread([&server] { server.run(); });

    CompareSummary summary;
    try {
        for (int rep = 0; rep < cfg.repetitions; ++rep) {
            const BeamListFile set =
                gen_beam_list(beam_template, cfg.beams_per_set,
                              seed_for(cfg.seed, static_cast<std::uint64_t>(rep)));
            TreatmentPlan plan;
            plan.beams = set.beams;
            plan.transitions = cfg.transitions;

            const TreatmentLog s_log = run_static(plan, trace, cfg.session);

            OmcClientConfig occ;
            occ.host = "127.0.0.1";
            occ.port = server.port();
            occ.slot_interval_ms = scfg.omc.slot_interval_ms;
            occ.session = cfg.session;
            const TreatmentLog o_log = run_omc(plan, trace, occ);

            CompareRow row;
            row.rep = rep;
            row.static_idle_ms = s_log.idle_ms();
            row.omc_idle_ms = o_log.idle_ms();
            row.static_interruptions = s_log.interruptions;
            row.omc_interruptions = o_log.interruptions;
            row.static_makespan_ms = s_log.makespan_ms();
            row.omc_makespan_ms = o_log.makespan_ms();
            row.static_complete = s_log.complete;
            row.omc_complete = o_log.complete;
            row.static_beam_on_us = s_log.beam_on_us;
            row.static_transition_us = s_log.transition_us;
            row.static_idle_us = s_log.idle_us;
            row.static_makespan_us = s_log.makespan_us;
            row.omc_beam_on_us = o_log.beam_on_us;
            row.omc_transition_us = o_log.transition_us;
            row.omc_idle_us = o_log.idle_us;
            row.omc_makespan_us = o_log.makespan_us;
            summary.rows.push_back(row);
        }
    } catch (...) {
        server.stop();
        server_thread.join();
        throw;
    }
    server.stop();
    server_thread.join();

    const double n = static_cast<double>(summary.rows.size());
    double s_sum = 0.0, o_sum = 0.0;
    for (const auto& row : summary.rows) {
        s_sum += row.static_idle_ms;
        o_sum += row.omc_idle_ms;
        if (row.omc_idle_ms < row.static_idle_ms) ++summary.omc_wins;
        if (row.omc_idle_ms == row.static_idle_ms) ++summary.ties;
    }
    summary.mean_static_idle_ms = s_sum / n;
    summary.mean_omc_idle_ms = o_sum / n;
    double s_var = 0.0, o_var = 0.0;
    for (const auto& row : summary.rows) {
        s_var += (row.static_idle_ms - summary.mean_static_idle_ms) *
                 (row.static_idle_ms - summary.mean_static_idle_ms);
        o_var += (row.omc_idle_ms - summary.mean_omc_idle_ms) *
                 (row.omc_idle_ms - summary.mean_omc_idle_ms);
    }
    if (summary.rows.size() > 1) {
        summary.sd_static_idle_ms = std::sqrt(s_var / (n - 1.0));
        summary.sd_omc_idle_ms = std::sqrt(o_var / (n - 1.0));
    }
    summary.reduction_pct =
        summary.mean_static_idle_ms > 0.0
            ? 100.0 * (summary.mean_static_idle_ms - summary.mean_omc_idle_ms) /
                  summary.mean_static_idle_ms
            : 0.0;
    summary.sign_test_p = sign_test_tail(
        summary.omc_wins, static_cast<int>(summary.rows.size()) - summary.ties);
    return summary;
}

} // namespace beamsched
