#ifndef BEAMSCHED_PROTOCOL_HPP
#define BEAMSCHED_PROTOCOL_HPP

#include <string>
#include <string_view>
#include <vector>

#include "beamsched/beam.hpp"
#include "beamsched/beam_service.hpp"

namespace beamsched {

// Line-oriented CSV exchanged over the verification socket, UTF-8, \n ends.
//
// request:  BEAMS,<slot_hint>,<count>
//           id,remaining_ms,xlo,xhi,ylo,yhi,zlo,zhi,started,running   (3D)
//           id,remaining_ms,threshold                                 (1D)
// response: RESULTS,<slot_index>,<status>         status OK | GAP
//           id,px,py,pz,combined_p,completed,deliverable   (one per beam, OK only)
//
// In 1D mode the single axis probability fills px, py and pz alike.

struct BeamRequest {
    long slot_hint = 0;
    AxisMode mode = AxisMode::three_d;
    std::vector<BeamSpec> beams;
};

struct ResponseRow {
    std::uint64_t id = 0;
    double p_axis[3] = {0.0, 0.0, 0.0};
    double combined_p = 0.0;
    bool completed = false;
    bool deliverable = false;
};

struct BeamResponse {
    long slot_index = 0;
    bool gap = true;
    std::vector<ResponseRow> rows; // empty on gap
};

std::string encode_request(const BeamRequest& request);
BeamRequest decode_request(std::string_view text);

std::string encode_response(const BeamResponse& response);
BeamResponse decode_response(std::string_view text);

// Conversions between service results and wire rows.
BeamResponse to_response(const SlotOutcome& outcome);

// Incremental parsing for socket sessions: header first, then per-line rows.
struct RequestHeader {
    long slot_hint = 0;
    std::size_t count = 0;
};
RequestHeader parse_request_header(std::string_view line);
BeamSpec parse_request_line(std::string_view line, AxisMode& mode, bool mode_known,
                            long line_no);

struct ResponseHeader {
    long slot_index = 0;
    bool gap = true;
};
ResponseHeader parse_response_header(std::string_view line);
ResponseRow parse_response_line(std::string_view line, long line_no);

std::string encode_request_line(const BeamSpec& beam, AxisMode mode);
std::string encode_response_line(const ResponseRow& row);

} // namespace beamsched

#endif
