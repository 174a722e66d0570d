#include "beamsched/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace beamsched {

std::string format_double(double value) {
    if (!std::isfinite(value))
        throw std::invalid_argument("cannot format non-finite value");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    std::string s(buf, res.ptr);
    // keep declaration/CSV values visibly floating point
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find("inf") == std::string::npos)
        s += ".0";
    return s;
}

double parse_double_field(std::string_view field, long line) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && field.front() == '+') ++first;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ParseError("malformed number '" + std::string(field) + "'", line);
    if (!std::isfinite(value))
        throw ParseError("non-finite number '" + std::string(field) + "'", line);
    return value;
}

std::uint64_t parse_u64_field(std::string_view field, long line) {
    std::uint64_t value = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw ParseError("malformed id '" + std::string(field) + "'", line);
    return value;
}

bool parse_bool_field(std::string_view field, long line) {
    if (field == "0") return false;
    if (field == "1") return true;
    throw ParseError("malformed flag '" + std::string(field) + "' (expected 0 or 1)",
                     line);
}

std::vector<std::string> split_csv(std::string_view line, std::size_t expected_cols,
                                   long line_no) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (out.size() != expected_cols)
        throw ParseError("expected " + std::to_string(expected_cols) +
                             " columns, got " + std::to_string(out.size()),
                         line_no);
    return out;
}

namespace {

// Iterates lines of a text blob, tracking 1-based line numbers and
// tolerating a trailing newline.
struct LineReader {
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

const char* kTraceHeader1D = "t[ms],x[mm]";
const char* kTraceHeader3D = "t[ms],x[mm],y[mm],z[mm]";
const char* kBeamHeader1D = "ID,Time[ms],Threshold[mm]";
const char* kBeamHeader3D =
    "ID,Time[ms],XLow[mm],XHigh[mm],YLow[mm],YHigh[mm],ZLow[mm],ZHigh[mm]";

} // namespace

MotionTrace parse_motion_trace(std::string_view text) {
    LineReader reader{text};
    std::string_view header;
    if (!reader.next(header)) throw ParseError("empty trace file", 1);

    MotionTrace trace;
    if (header == kTraceHeader1D) {
        trace.axes = 1;
    } else if (header == kTraceHeader3D) {
        trace.axes = 3;
    } else {
        throw ParseError("unrecognized trace header '" + std::string(header) + "'", 1);
    }

    const std::size_t cols = 1 + static_cast<std::size_t>(trace.axes);
    std::string_view line;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto fields = split_csv(line, cols, reader.line_no);
        const double t = parse_double_field(fields[0], reader.line_no);
        if (!trace.t_ms.empty() && t <= trace.t_ms.back())
            throw ParseError("timestamps must be strictly increasing", reader.line_no);
        trace.t_ms.push_back(t);
        for (int ax = 0; ax < trace.axes; ++ax)
            trace.axis[static_cast<std::size_t>(ax)].push_back(
                parse_double_field(fields[static_cast<std::size_t>(ax) + 1],
                                   reader.line_no));
    }
    return trace;
}

std::string write_motion_trace(const MotionTrace& trace) {
    std::string out;
    out += trace.axes == 1 ? kTraceHeader1D : kTraceHeader3D;
    out += '\n';
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out += format_double(trace.t_ms[i]);
        for (int ax = 0; ax < trace.axes; ++ax) {
            out += ',';
            out += format_double(trace.axis[static_cast<std::size_t>(ax)][i]);
        }
        out += '\n';
    }
    return out;
}

BeamListFile parse_beam_list(std::string_view text) {
    LineReader reader{text};
    std::string_view header;
    if (!reader.next(header)) throw ParseError("empty beam list", 1);

    BeamListFile list;
    if (header == kBeamHeader1D) {
        list.mode = AxisMode::one_d;
    } else if (header == kBeamHeader3D) {
        list.mode = AxisMode::three_d;
    } else {
        throw ParseError("unrecognized beam list header '" + std::string(header) + "'",
                         1);
    }

    std::set<std::uint64_t> seen;
    std::string_view line;
    while (reader.next(line)) {
        if (line.empty()) continue;
        BeamSpec beam;
        if (list.mode == AxisMode::one_d) {
            const auto f = split_csv(line, 3, reader.line_no);
            beam.id = parse_u64_field(f[0], reader.line_no);
            beam.remaining_ms = parse_double_field(f[1], reader.line_no);
            const double thr = parse_double_field(f[2], reader.line_no);
            if (thr < 0.0)
                throw ParseError("threshold must be >= 0", reader.line_no);
            beam.bounds.push_back({-thr, thr});
        } else {
            const auto f = split_csv(line, 8, reader.line_no);
            beam.id = parse_u64_field(f[0], reader.line_no);
            beam.remaining_ms = parse_double_field(f[1], reader.line_no);
            for (int ax = 0; ax < 3; ++ax) {
                AxisBounds bb;
                bb.lower_mm = parse_double_field(f[2 + 2 * static_cast<std::size_t>(ax)],
                                                 reader.line_no);
                bb.upper_mm = parse_double_field(f[3 + 2 * static_cast<std::size_t>(ax)],
                                                 reader.line_no);
                if (bb.lower_mm > bb.upper_mm)
                    throw ParseError("lower bound exceeds upper bound",
                                     reader.line_no);
                beam.bounds.push_back(bb);
            }
        }
        if (!(beam.remaining_ms > 0.0))
            throw ParseError("beam time must be > 0", reader.line_no);
        if (!seen.insert(beam.id).second)
            throw ParseError("duplicate beam id " + std::to_string(beam.id),
                             reader.line_no);
        list.beams.push_back(std::move(beam));
    }
    return list;
}

std::string write_beam_list(const BeamListFile& list) {
    std::string out;
    out += list.mode == AxisMode::one_d ? kBeamHeader1D : kBeamHeader3D;
    out += '\n';
    for (const auto& beam : list.beams) {
        out += std::to_string(beam.id);
        out += ',';
        out += format_double(beam.remaining_ms);
        if (list.mode == AxisMode::one_d) {
            if (beam.bounds.size() != 1 ||
                beam.bounds[0].lower_mm != -beam.bounds[0].upper_mm)
                throw std::invalid_argument(
                    "1D beam list requires one symmetric bound pair");
            out += ',';
            out += format_double(beam.bounds[0].upper_mm);
        } else {
            if (beam.bounds.size() != 3)
                throw std::invalid_argument("3D beam list requires three bound pairs");
            for (const auto& bb : beam.bounds) {
                out += ',';
                out += format_double(bb.lower_mm);
                out += ',';
                out += format_double(bb.upper_mm);
            }
        }
        out += '\n';
    }
    return out;
}

namespace {

struct Declaration {
    std::string name;
    std::vector<double> values;
    bool is_array = false;
    long line = 0;
};

// Splits a declaration block into `;`-terminated statements, dropping
// comments. Statements may span lines (arrays often wrap).
std::vector<std::pair<std::string, long>> statements(std::string_view text) {
    std::vector<std::pair<std::string, long>> out;
    std::string current;
    long line_no = 1;
    long start_line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
            while (i < text.size() && text[i] != '\n') ++i;
            ++line_no;
            continue;
        }
        if (c == '\n') {
            ++line_no;
            if (current.empty())
                start_line = line_no;
            else
                current += ' ';
            continue;
        }
        if (c == ';') {
            out.emplace_back(current, start_line);
            current.clear();
            start_line = line_no;
            continue;
        }
        if (current.empty() && (c == ' ' || c == '\t' || c == '\r')) {
            start_line = line_no;
            continue;
        }
        current += c;
    }
    // trailing garbage without ';' is ignored unless it has content
    bool rest_blank = true;
    for (char c : current)
        if (c != ' ' && c != '\t' && c != '\r') rest_blank = false;
    if (!rest_blank) out.emplace_back(current, start_line);
    return out;
}

std::vector<std::string> tokenize(const std::string& stmt) {
    std::vector<std::string> tokens;
    std::string tok;
    auto flush = [&] {
        if (!tok.empty()) {
            tokens.push_back(tok);
            tok.clear();
        }
    };
    for (char c : stmt) {
        if (c == ' ' || c == '\t' || c == '\r') {
            flush();
        } else if (c == '=' || c == '{' || c == '}' || c == ',' || c == '[' ||
                   c == ']') {
            flush();
            tokens.push_back(std::string(1, c));
        } else {
            tok += c;
        }
    }
    flush();
    return tokens;
}

} // namespace

MotionModel1D parse_declarations(std::string_view text) {
    std::map<std::string, Declaration> decls;

    for (const auto& [stmt, line] : statements(text)) {
        auto tokens = tokenize(stmt);
        if (tokens.empty()) continue;
        std::size_t idx = 0;
        if (tokens[idx] == "const") ++idx;
        if (idx >= tokens.size()) continue;
        if (tokens[idx] != "double") continue; // clocks, channels, etc.
        ++idx;
        if (idx >= tokens.size())
            throw ParseError("declaration missing a name", line);
        Declaration d;
        d.name = tokens[idx++];
        d.line = line;

        std::size_t declared_arity = 0;
        if (idx < tokens.size() && tokens[idx] == "[") {
            d.is_array = true;
            ++idx;
            if (idx >= tokens.size())
                throw ParseError("unterminated array declarator for '" + d.name + "'",
                                 line);
            if (tokens[idx] != "]") {
                declared_arity = static_cast<std::size_t>(
                    parse_double_field(tokens[idx], line));
                ++idx;
            }
            if (idx >= tokens.size() || tokens[idx] != "]")
                throw ParseError("unterminated array declarator for '" + d.name + "'",
                                 line);
            ++idx;
        }

        if (idx == tokens.size()) {
            // uninitialized scratch variable; not a model parameter
            continue;
        }
        if (tokens[idx] != "=")
            throw ParseError("expected '=' in declaration of '" + d.name + "'", line);
        ++idx;

        if (d.is_array) {
            if (idx >= tokens.size() || tokens[idx] != "{")
                throw ParseError("expected '{' in array initializer of '" + d.name +
                                     "'",
                                 line);
            ++idx;
            bool want_value = true;
            while (idx < tokens.size() && tokens[idx] != "}") {
                if (tokens[idx] == ",") {
                    if (want_value)
                        throw ParseError("stray ',' in initializer of '" + d.name + "'",
                                         line);
                    want_value = true;
                } else {
                    if (!want_value)
                        throw ParseError("missing ',' in initializer of '" + d.name +
                                             "'",
                                         line);
                    d.values.push_back(parse_double_field(tokens[idx], line));
                    want_value = false;
                }
                ++idx;
            }
            if (idx >= tokens.size())
                throw ParseError("unterminated initializer of '" + d.name + "'", line);
            if (declared_arity != 0 && d.values.size() != declared_arity)
                throw ParseError("array '" + d.name + "' declares " +
                                     std::to_string(declared_arity) +
                                     " elements but initializes " +
                                     std::to_string(d.values.size()),
                                 line);
        } else {
            if (idx >= tokens.size())
                throw ParseError("missing value for '" + d.name + "'", line);
            std::string expr;
            for (; idx < tokens.size(); ++idx) expr += tokens[idx];
            // tolerate simple arithmetic only for ignored names (frequency)
            if (d.name == "period" || d.name == "drift" || d.name == "base" ||
                d.name == "accuracy" || d.name == "dt") {
                d.values.push_back(parse_double_field(expr, line));
            } else {
                continue;
            }
        }
        decls[d.name] = std::move(d);
    }

    auto require_scalar = [&](const std::string& name) {
        auto it = decls.find(name);
        if (it == decls.end() || it->second.values.empty())
            throw ParseError("missing declaration of '" + name + "'");
        if (it->second.is_array)
            throw ParseError("'" + name + "' must be scalar", it->second.line);
        return it->second.values[0];
    };
    auto require_array4 = [&](const std::string& name) {
        auto it = decls.find(name);
        if (it == decls.end())
            throw ParseError("missing declaration of '" + name + "'");
        if (!it->second.is_array || it->second.values.size() != 4)
            throw ParseError("array '" + name + "' must have exactly 4 elements",
                             it->second.line);
        std::array<double, 4> out;
        std::copy(it->second.values.begin(), it->second.values.end(), out.begin());
        return out;
    };

    MotionModel1D model;
    model.period_ms = require_scalar("period");
    model.drift = require_scalar("drift");
    model.base = require_scalar("base");
    model.a = require_array4("a");
    model.b = require_array4("b");
    if (auto it = decls.find("accuracy"); it != decls.end() && !it->second.values.empty())
        model.accuracy = it->second.values[0];
    if (auto it = decls.find("dt"); it != decls.end() && !it->second.values.empty())
        model.dt_ms = it->second.values[0];
    model.validate();
    return model;
}

std::string write_declarations(const MotionModel1D& model) {
    model.validate();
    std::string out;
    out += "const double accuracy = " + format_double(model.accuracy) + ";\n";
    out += "const double dt = " + format_double(model.dt_ms) + ";\n";
    out += "\n";
    out += "const double period = " + format_double(model.period_ms) + ";\n";
    out += "const double drift = " + format_double(model.drift) + ";\n";
    out += "\n";
    out += "double base = " + format_double(model.base) + ";\n";
    out += "double a[4] = { " + format_double(model.a[0]) + ", " +
           format_double(model.a[1]) + ", " + format_double(model.a[2]) + ", " +
           format_double(model.a[3]) + " };\n";
    out += "double b[4] = { " + format_double(model.b[0]) + ", " +
           format_double(model.b[1]) + ", " + format_double(model.b[2]) + ", " +
           format_double(model.b[3]) + " };\n";
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + path);
}

MotionTrace read_motion_trace_file(const std::string& path) {
    return parse_motion_trace(read_file(path));
}

void write_motion_trace_file(const std::string& path, const MotionTrace& trace) {
    write_file(path, write_motion_trace(trace));
}

BeamListFile read_beam_list_file(const std::string& path) {
    return parse_beam_list(read_file(path));
}

void write_beam_list_file(const std::string& path, const BeamListFile& list) {
    write_file(path, write_beam_list(list));
}

MotionModel1D read_declarations_file(const std::string& path) {
    return parse_declarations(read_file(path));
}

void write_declarations_file(const std::string& path, const MotionModel1D& model) {
    write_file(path, write_declarations(model));
}

} // namespace beamsched
