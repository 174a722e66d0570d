#ifndef BEAMSCHED_SERVER_HPP
#define BEAMSCHED_SERVER_HPP

#include <atomic>
#include <cstdint>
#include <string>

#include "beamsched/beam_service.hpp"
#include "beamsched/io.hpp"
#include "beamsched/net.hpp"
#include "beamsched/omc_pipeline.hpp"

namespace beamsched {

struct ServerConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 9474;
    OmcConfig omc;
    VerifyConfig verify;
    bool realtime = false;
    std::uint64_t seed = 0;
};

// The verification server: replays its sensor trace through the refit
// pipeline and answers beam requests slot by slot. One client session at a
// time; a fresh session restarts the trace replay.
class BeamServer {
public:
    BeamServer(MotionTrace feed, ServerConfig cfg);

    // Accept loop; returns after stop(). Serves sessions sequentially.
    void run();
    // Accepts and serves a single session, then returns.
    void run_once();
    // Serves exactly one session on an established connection.
    void serve_session(Connection conn);

    std::uint16_t port() const { return listener_.port(); }
    void stop();

    long sessions_served() const { return sessions_; }

private:
    std::string handle_request(OmcPipeline& pipeline, SlotModelSet& current,
                               const std::string& header_line, Connection& conn);

    MotionTrace feed_;
    ServerConfig cfg_;
    Listener listener_;
    std::atomic<bool> stopping_{false};
    long sessions_ = 0;
};

} // namespace beamsched

#endif
