#ifndef BEAMSCHED_TREATMENT_HPP
#define BEAMSCHED_TREATMENT_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "beamsched/beam.hpp"
#include "beamsched/io.hpp"
#include "beamsched/omc_pipeline.hpp"
#include "beamsched/server.hpp"

namespace beamsched {

// Robot reconfiguration time between two beams: a constant, a symmetric
// matrix, or straight-line travel over beam coordinates.
struct TransitionModel {
    enum class Kind { constant, matrix, coords };
    Kind kind = Kind::constant;
    double constant_ms = 1500.0;
    std::vector<std::vector<double>> matrix_ms;
    std::vector<std::array<double, 3>> coords;
    double speed_mm_per_ms = 1.0;

    double between_ms(std::size_t from, std::size_t to) const;
    void validate(std::size_t beam_count) const;
};

struct TreatmentPlan {
    std::vector<BeamSpec> beams; // remaining_ms = total delivery time
    TransitionModel transitions;
};

// Greedy nearest-neighbor order starting from start_index. With constant
// transitions every choice ties, so the input order is preserved.
std::vector<std::size_t> static_order(const TreatmentPlan& plan,
                                      std::size_t start_index = 0);

struct TreatmentEvent {
    enum class Kind {
        beam_start,
        beam_halt,    // actual threshold violation mid-delivery
        beam_resume,
        beam_finish,
        verdict_stop, // verification said no / model gap; not an interruption
        session_end,
    };
    double t_ms = 0.0;
    std::uint64_t beam_id = 0;
    Kind kind = Kind::beam_start;
};

const char* to_string(TreatmentEvent::Kind kind);

// Session accounting in integer microseconds so the decomposition
// makespan = beam-on + transition + idle holds exactly.
struct TreatmentLog {
    std::vector<TreatmentEvent> events;
    std::int64_t beam_on_us = 0;
    std::int64_t transition_us = 0;
    std::int64_t idle_us = 0;
    std::int64_t makespan_us = 0;
    int interruptions = 0;
    int beams_completed = 0;
    int beams_total = 0;
    bool complete = false;
    bool aborted = false; // connection to the verification service was lost
    double session_origin_ms = 0.0;

    double beam_on_ms() const { return static_cast<double>(beam_on_us) / 1000.0; }
    double transition_ms() const {
        return static_cast<double>(transition_us) / 1000.0;
    }
    double idle_ms() const { return static_cast<double>(idle_us) / 1000.0; }
    double makespan_ms() const { return static_cast<double>(makespan_us) / 1000.0; }

    std::string events_csv() const;
    std::string summary_text(const std::string& label) const;
};

struct SessionConfig {
    double origin_ms = 0.0; // session start on the trace clock
    double max_session_ms = 4.0 * 3600.0 * 1000.0;
};

// Delivers strictly in the static order, waiting out blocked beams.
TreatmentLog run_static(const TreatmentPlan& plan, const MotionTrace& trace,
                        const SessionConfig& session);

struct OmcClientConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 9474;
    double slot_interval_ms = 3000.0;
    SessionConfig session;
};

// Drives a session against the verification service: per slot it sends the
// outstanding beams, picks the first deliverable beam in the position-updated
// greedy order, and reorders around blocked beams. Gap responses pause the
// treatment.
TreatmentLog run_omc(const TreatmentPlan& plan, const MotionTrace& trace,
                     const OmcClientConfig& cfg);

// ---- study driver -----------------------------------------------------

struct CompareConfig {
    int repetitions = 30;
    int beams_per_set = 100;
    std::uint64_t seed = 0;
    TransitionModel transitions;
    SessionConfig session;
    ServerConfig server; // host/port ignored; an internal server is started
};

struct CompareRow {
    int rep = 0;
    double static_idle_ms = 0.0;
    double omc_idle_ms = 0.0;
    int static_interruptions = 0;
    int omc_interruptions = 0;
    double static_makespan_ms = 0.0;
    double omc_makespan_ms = 0.0;
    bool static_complete = false;
    bool omc_complete = false;
    // exact accounting, for decomposition audits
    std::int64_t static_beam_on_us = 0, static_transition_us = 0,
                 static_idle_us = 0, static_makespan_us = 0;
    std::int64_t omc_beam_on_us = 0, omc_transition_us = 0, omc_idle_us = 0,
                 omc_makespan_us = 0;
};

struct CompareSummary {
    std::vector<CompareRow> rows;
    double mean_static_idle_ms = 0.0;
    double mean_omc_idle_ms = 0.0;
    double sd_static_idle_ms = 0.0;
    double sd_omc_idle_ms = 0.0;
    double reduction_pct = 0.0; // (static - omc) / static * 100
    int omc_wins = 0;
    int ties = 0;
    double sign_test_p = 1.0; // one-sided, wins vs fair coin

    std::string table_csv() const;
    std::string summary_text() const;
};

// Repeats static vs. OMC sessions over freshly synthesized beam sets.
CompareSummary compare(const BeamListFile& beam_template, const MotionTrace& trace,
                       const CompareConfig& cfg);

// One-sided sign test tail: P(X >= wins) for X ~ Binomial(n, 1/2).
double sign_test_tail(int wins, int n);

} // namespace beamsched

#endif
