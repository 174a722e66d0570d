#include "beamsched/protocol.hpp"

#include <charconv>
#include <stdexcept>

#include "beamsched/errors.hpp"
#include "beamsched/io.hpp"

namespace beamsched {
namespace {

long parse_long(std::string_view field, long line) {
    long value = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw ParseError("malformed integer '" + std::string(field) + "'", line);
    return value;
}

struct Lines {
    std::string_view text;
    std::size_t pos = 0;
    long line_no = 0;

    bool next(std::string_view& line) {
        if (pos >= text.size()) return false;
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            line = text.substr(pos);
            pos = text.size();
        } else {
            line = text.substr(pos, nl - pos);
            pos = nl + 1;
        }
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        return true;
    }
};

const char* bool_str(bool v) { return v ? "1" : "0"; }

} // namespace

RequestHeader parse_request_header(std::string_view line) {
    const auto fields = split_csv(line, 3, 1);
    if (fields[0] != "BEAMS")
        throw ParseError("expected BEAMS header, got '" + fields[0] + "'", 1);
    RequestHeader header;
    header.slot_hint = parse_long(fields[1], 1);
    const long count = parse_long(fields[2], 1);
    if (count < 0) throw ParseError("negative beam count", 1);
    header.count = static_cast<std::size_t>(count);
    return header;
}

BeamSpec parse_request_line(std::string_view line, AxisMode& mode, bool mode_known,
                            long line_no) {
    // column count decides the form: 3 = legacy 1D, 10 = 3D
    std::size_t cols = 0;
    for (char c : line)
        if (c == ',') ++cols;
    ++cols;
    AxisMode line_mode;
    if (cols == 3) {
        line_mode = AxisMode::one_d;
    } else if (cols == 10) {
        line_mode = AxisMode::three_d;
    } else {
        throw ParseError("expected 3 or 10 columns, got " + std::to_string(cols),
                         line_no);
    }
    if (mode_known && line_mode != mode)
        throw ParseError("mixed 1D and 3D beam lines", line_no);
    mode = line_mode;

    BeamSpec beam;
    if (line_mode == AxisMode::one_d) {
        const auto f = split_csv(line, 3, line_no);
        beam.id = parse_u64_field(f[0], line_no);
        beam.remaining_ms = parse_double_field(f[1], line_no);
        const double thr = parse_double_field(f[2], line_no);
        if (thr < 0.0) throw ParseError("threshold must be >= 0", line_no);
        beam.bounds.push_back({-thr, thr});
    } else {
        const auto f = split_csv(line, 10, line_no);
        beam.id = parse_u64_field(f[0], line_no);
        beam.remaining_ms = parse_double_field(f[1], line_no);
        for (int ax = 0; ax < 3; ++ax) {
            AxisBounds bb;
            bb.lower_mm =
                parse_double_field(f[2 + 2 * static_cast<std::size_t>(ax)], line_no);
            bb.upper_mm =
                parse_double_field(f[3 + 2 * static_cast<std::size_t>(ax)], line_no);
            beam.bounds.push_back(bb);
        }
        beam.started = parse_bool_field(f[8], line_no);
        beam.running = parse_bool_field(f[9], line_no);
    }
    return beam;
}

std::string encode_request_line(const BeamSpec& beam, AxisMode mode) {
    std::string out = std::to_string(beam.id);
    out += ',';
    out += format_double(beam.remaining_ms);
    if (mode == AxisMode::one_d) {
        if (beam.bounds.size() != 1 ||
            beam.bounds[0].lower_mm != -beam.bounds[0].upper_mm)
            throw std::invalid_argument("1D request needs one symmetric bound pair");
        out += ',';
        out += format_double(beam.bounds[0].upper_mm);
    } else {
        if (beam.bounds.size() != 3)
            throw std::invalid_argument("3D request needs three bound pairs");
        for (const auto& bb : beam.bounds) {
            out += ',';
            out += format_double(bb.lower_mm);
            out += ',';
            out += format_double(bb.upper_mm);
        }
        out += ',';
        out += bool_str(beam.started);
        out += ',';
        out += bool_str(beam.running);
    }
    return out;
}

std::string encode_request(const BeamRequest& request) {
    std::string out = "BEAMS," + std::to_string(request.slot_hint) + "," +
                      std::to_string(request.beams.size()) + "\n";
    for (const auto& beam : request.beams) {
        out += encode_request_line(beam, request.mode);
        out += '\n';
    }
    return out;
}

BeamRequest decode_request(std::string_view text) {
    Lines lines{text};
    std::string_view line;
    if (!lines.next(line)) throw ParseError("empty request", 1);
    const RequestHeader header = parse_request_header(line);

    BeamRequest request;
    request.slot_hint = header.slot_hint;
    bool mode_known = false;
    while (lines.next(line)) {
        if (line.empty()) continue;
        request.beams.push_back(
            parse_request_line(line, request.mode, mode_known, lines.line_no));
        mode_known = true;
    }
    if (request.beams.size() != header.count)
        throw ParseError("header declares " + std::to_string(header.count) +
                         " beams but " + std::to_string(request.beams.size()) +
                         " lines follow");
    return request;
}

ResponseHeader parse_response_header(std::string_view line) {
    const auto fields = split_csv(line, 3, 1);
    if (fields[0] != "RESULTS")
        throw ParseError("expected RESULTS header, got '" + fields[0] + "'", 1);
    ResponseHeader header;
    header.slot_index = parse_long(fields[1], 1);
    if (fields[2] == "OK") {
        header.gap = false;
    } else if (fields[2] == "GAP") {
        header.gap = true;
    } else {
        throw ParseError("unknown status '" + fields[2] + "'", 1);
    }
    return header;
}

ResponseRow parse_response_line(std::string_view line, long line_no) {
    const auto f = split_csv(line, 7, line_no);
    ResponseRow row;
    row.id = parse_u64_field(f[0], line_no);
    for (int ax = 0; ax < 3; ++ax)
        row.p_axis[ax] = parse_double_field(f[1 + static_cast<std::size_t>(ax)], line_no);
    row.combined_p = parse_double_field(f[4], line_no);
    row.completed = parse_bool_field(f[5], line_no);
    row.deliverable = parse_bool_field(f[6], line_no);
    return row;
}

std::string encode_response_line(const ResponseRow& row) {
    std::string out = std::to_string(row.id);
    for (int ax = 0; ax < 3; ++ax) {
        out += ',';
        out += format_double(row.p_axis[ax]);
    }
    out += ',';
    out += format_double(row.combined_p);
    out += ',';
    out += bool_str(row.completed);
    out += ',';
    out += bool_str(row.deliverable);
    return out;
}

std::string encode_response(const BeamResponse& response) {
    std::string out = "RESULTS," + std::to_string(response.slot_index) + "," +
                      (response.gap ? "GAP" : "OK") + "\n";
    for (const auto& row : response.rows) {
        out += encode_response_line(row);
        out += '\n';
    }
    return out;
}

BeamResponse decode_response(std::string_view text) {
    Lines lines{text};
    std::string_view line;
    if (!lines.next(line)) throw ParseError("empty response", 1);
    const ResponseHeader header = parse_response_header(line);
    BeamResponse response;
    response.slot_index = header.slot_index;
    response.gap = header.gap;
    while (lines.next(line)) {
        if (line.empty()) continue;
        if (response.gap)
            throw ParseError("row after GAP status", lines.line_no);
        response.rows.push_back(parse_response_line(line, lines.line_no));
    }
    return response;
}

BeamResponse to_response(const SlotOutcome& outcome) {
    BeamResponse response;
    response.slot_index = outcome.slot_index;
    response.gap = outcome.status == SlotOutcome::Status::gap;
    for (const auto& res : outcome.results) {
        ResponseRow row;
        row.id = res.beam_id;
        const std::size_t axes = res.axis.size();
        for (std::size_t ax = 0; ax < 3; ++ax) {
            if (ax < axes) {
                row.p_axis[ax] = res.axis[ax].p_hat;
            } else if (axes == 1) {
                row.p_axis[ax] = res.axis[0].p_hat; // 1D fills all columns
            } else {
                row.p_axis[ax] = 0.0; // query never ran before the deadline
            }
        }
        row.combined_p = res.combined_p;
        row.completed = res.completed;
        row.deliverable = res.deliverable;
        response.rows.push_back(row);
    }
    return response;
}

} // namespace beamsched
