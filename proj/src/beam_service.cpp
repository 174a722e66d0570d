#include "beamsched/beam_service.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <chrono>
#include <stdexcept>
#include <thread>

#include "beamsched/rng.hpp"

namespace beamsched {
namespace {

// Priority order as indices into the request list. The running beam leads,
// then beams already started, then the rest alternating between the widest
// minimum band and the shortest remaining time; ascending id breaks ties.
std::vector<std::size_t> priority_order(const std::vector<BeamSpec>& beams) {
    std::vector<std::size_t> idx(beams.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        return beams[x].id < beams[y].id;
    });

    std::vector<std::size_t> order;
    order.reserve(beams.size());
    std::vector<bool> placed(beams.size(), false);

    for (std::size_t i : idx)
        if (beams[i].running && !placed[i]) {
            order.push_back(i);
            placed[i] = true;
        }
    for (std::size_t i : idx)
        if (beams[i].started && !placed[i]) {
            order.push_back(i);
            placed[i] = true;
        }

    std::vector<std::size_t> rest;
    for (std::size_t i : idx)
        if (!placed[i]) rest.push_back(i);

    std::vector<std::size_t> by_width = rest;
    std::stable_sort(by_width.begin(), by_width.end(),
                     [&](std::size_t x, std::size_t y) {
                         return beams[x].min_width() > beams[y].min_width();
                     });
    std::vector<std::size_t> by_time = rest;
    std::stable_sort(by_time.begin(), by_time.end(), [&](std::size_t x, std::size_t y) {
        return beams[x].remaining_ms < beams[y].remaining_ms;
    });

    std::size_t wi = 0, ti = 0;
    bool width_turn = true;
    for (std::size_t placed_count = 0; placed_count < rest.size(); ++placed_count) {
        std::size_t pick;
        if (width_turn) {
            while (placed[by_width[wi]]) ++wi;
            pick = by_width[wi];
        } else {
            while (placed[by_time[ti]]) ++ti;
            pick = by_time[ti];
        }
        placed[pick] = true;
        order.push_back(pick);
        width_turn = !width_turn;
    }
    return order;
}

} // namespace

std::vector<InvariantQuery> build_queries(const BeamSpec& beam, double scope_ms) {
    if (beam.bounds.empty() || (beam.bounds.size() != 1 && beam.bounds.size() != 3))
        throw std::invalid_argument("beam must carry one or three bound pairs");
    if (!(beam.remaining_ms >= 0.0))
        throw std::invalid_argument("beam remaining time must be >= 0");
    std::vector<InvariantQuery> queries;
    queries.reserve(beam.bounds.size());
    for (const auto& bb : beam.bounds) {
        if (!std::isfinite(bb.lower_mm) || !std::isfinite(bb.upper_mm))
            throw std::invalid_argument("beam bounds: non-finite");
        if (!(bb.lower_mm <= bb.upper_mm))
            throw std::invalid_argument("beam bounds: lower exceeds upper");
        queries.push_back({scope_ms, bb.lower_mm, bb.upper_mm});
    }
    return queries;
}

std::vector<BeamSpec> prioritize(std::vector<BeamSpec> beams) {
    const std::vector<std::size_t> order = priority_order(beams);
    std::vector<BeamSpec> out;
    out.reserve(beams.size());
    for (std::size_t i : order) out.push_back(beams[i]);
    return out;
}

SlotOutcome verify_slot(const std::vector<BeamSpec>& beams, const SlotModelSet& models,
                        const VerifyConfig& cfg) {
    SlotOutcome outcome;
    outcome.slot_index = models.slot_index;
    if (!models.valid) {
        outcome.status = SlotOutcome::Status::gap;
        return outcome;
    }
    outcome.status = SlotOutcome::Status::ok;
    outcome.results.resize(beams.size());

    RunBudget budget;
    if (cfg.deadline_ms) {
        budget.deadline =
            std::chrono::steady_clock::now() +
            std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                std::chrono::duration<double, std::milli>(*cfg.deadline_ms));
    }

    const std::vector<std::size_t> order = priority_order(beams);

    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t slot = cursor.fetch_add(1);
            if (slot >= order.size()) return;
            const std::size_t i = order[slot];
            const BeamSpec& beam = beams[i];
            VerificationResult res;
            res.beam_id = beam.id;
            res.slot_index = models.slot_index;

            std::vector<InvariantQuery> queries;
            try {
                queries = build_queries(beam, cfg.scope_ms);
            } catch (const std::invalid_argument&) {
                res.error = true;
                outcome.results[i] = std::move(res);
                continue;
            }

            double combined = 1.0;
            bool all_completed = true;
            for (std::size_t ax = 0; ax < queries.size(); ++ax) {
                const MotionModel1D& model = models.models[ax];
                const auto pcfg = derive_perturbation(model.accuracy);
                const std::uint64_t seed =
                    seed_for(cfg.session_seed,
                             (static_cast<std::uint64_t>(models.slot_index) << 40) ^
                                 (beam.id << 8) ^ ax);
                const auto est =
                    check_invariant(model, pcfg, queries[ax], cfg.smc, seed, budget);
                res.axis.push_back(est);
                combined = std::min(combined, est.p_hat);
                if (!est.completed) {
                    all_completed = false;
                    break; // slot budget exhausted
                }
            }
            res.combined_p = combined;
            res.completed = all_completed && res.axis.size() == queries.size();
            res.deliverable = res.completed && combined >= cfg.cutoff;
            outcome.results[i] = std::move(res);
        }
    };

    int workers = cfg.workers > 0
                      ? cfg.workers
                      : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(order.size())));

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    return outcome;
}

} // namespace beamsched
