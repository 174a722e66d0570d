#ifndef BEAMSCHED_BEAM_SERVICE_HPP
#define BEAMSCHED_BEAM_SERVICE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "beamsched/beam.hpp"
#include "beamsched/omc_pipeline.hpp"
#include "beamsched/smc.hpp"

namespace beamsched {

// One invariant query per axis; symmetric 1D thresholds become [-thr, +thr].
// Throws std::invalid_argument for malformed bounds.
std::vector<InvariantQuery> build_queries(const BeamSpec& beam, double scope_ms);

// Verification order within a slot: the running beam first, then beams that
// already started, then the rest interleaved between widest minimum threshold
// and shortest remaining time. Ties fall back to ascending id.
std::vector<BeamSpec> prioritize(std::vector<BeamSpec> beams);

struct VerificationResult {
    std::uint64_t beam_id = 0;
    std::vector<ProbabilityEstimate> axis; // one estimate per axis
    double combined_p = 0.0;               // min over axes
    bool completed = false;                // all axis queries ran to completion
    bool deliverable = false;
    bool error = false; // malformed beam, reported in place
    long slot_index = 0;
};

struct VerifyConfig {
    double cutoff = 0.5;   // alternate stricter choice: 0.91
    double scope_ms = 3000.0;
    std::optional<double> deadline_ms = 3000.0; // slot budget, wall clock
    int workers = 0;                            // 0 = hardware concurrency
    SmcConfig smc;
    std::uint64_t session_seed = 0;
};

struct SlotOutcome {
    enum class Status { ok, gap };
    Status status = Status::gap;
    long slot_index = 0;
    std::vector<VerificationResult> results; // request order; empty on gap
};

// Verifies every beam against the slot's models on a deadline-bounded worker
// pool. An invalid model set yields a gap outcome with no per-beam results;
// otherwise each request beam gets exactly one result, and beams whose
// queries missed the deadline come back incomplete and non-deliverable.
SlotOutcome verify_slot(const std::vector<BeamSpec>& beams, const SlotModelSet& models,
                        const VerifyConfig& cfg);

} // namespace beamsched

#endif
