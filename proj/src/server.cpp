#include "beamsched/server.hpp"

#include <utility>

#include "beamsched/protocol.hpp"

namespace beamsched {

BeamServer::BeamServer(MotionTrace feed, ServerConfig cfg)
    : feed_(std::move(feed)), cfg_(std::move(cfg)),
      listener_(cfg_.host, cfg_.port) {}

void BeamServer::stop() {
    stopping_.store(true);
    listener_.shutdown();
}

void BeamServer::run() {
    while (!stopping_.load()) {
        auto conn = listener_.accept();
        if (!conn) break;
        serve_session(std::move(*conn));
    }
}

void BeamServer::run_once() {
    auto conn = listener_.accept();
    if (conn) serve_session(std::move(*conn));
}

void BeamServer::serve_session(Connection conn) {
    OmcPipeline pipeline(feed_, cfg_.omc, cfg_.seed);
    SlotClock clock(0.0, cfg_.omc.slot_interval_ms, cfg_.realtime);
    SlotModelSet current; // starts invalid: slot_index -1

    ++sessions_;
    for (;;) {
        auto line = conn.read_line();
        if (!line) break; // client hung up; session over
        if (line->empty()) continue;

        RequestHeader header;
        try {
            header = parse_request_header(*line);
        } catch (const ParseError& e) {
            conn.write_all(std::string("ERROR,") + e.what() + "\n");
            break;
        }

        BeamRequest request;
        request.slot_hint = header.slot_hint;
        bool mode_known = false;
        bool bad = false;
        for (std::size_t i = 0; i < header.count; ++i) {
            auto row = conn.read_line();
            if (!row) return; // disconnect mid-request
            try {
                request.beams.push_back(parse_request_line(*row, request.mode,
                                                           mode_known,
                                                           static_cast<long>(i + 2)));
                mode_known = true;
            } catch (const ParseError& e) {
                conn.write_all(std::string("ERROR,") + e.what() + "\n");
                bad = true;
                break;
            }
        }
        if (bad) break;

        // advance the pipeline to the requested slot; earlier hints reuse the
        // current slot's models (mid-slot re-requests after a halt)
        while (pipeline.slots_processed() <= header.slot_hint) {
            clock.wait_for(pipeline.slots_processed());
            auto next = pipeline.run_slot();
            if (!next) {
                // sensor feed exhausted: answer with a gap from here on
                current = SlotModelSet{};
                current.slot_index = header.slot_hint;
                break;
            }
            current = *next;
        }

        VerifyConfig vcfg = cfg_.verify;
        vcfg.session_seed = seed_for(cfg_.seed, 0x5eff1ce);
        const SlotOutcome outcome = verify_slot(request.beams, current, vcfg);
        conn.write_all(encode_response(to_response(outcome)));
    }
}

} // namespace beamsched
