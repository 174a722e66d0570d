#ifndef BEAMSCHED_IO_HPP
#define BEAMSCHED_IO_HPP

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "beamsched/beam.hpp"
#include "beamsched/errors.hpp"
#include "beamsched/motion_model.hpp"

namespace beamsched {

// ---- number formatting -------------------------------------------------
// Shortest decimal form that parses back to the identical bits. Used by
// every writer so that write-parse round trips are exact.
std::string format_double(double value);
double parse_double_field(std::string_view field, long line);
std::uint64_t parse_u64_field(std::string_view field, long line);
bool parse_bool_field(std::string_view field, long line);

std::vector<std::string> split_csv(std::string_view line, std::size_t expected_cols,
                                   long line_no);

// ---- motion traces -----------------------------------------------------
// CSV, header `t[ms],x[mm]` (1D) or `t[ms],x[mm],y[mm],z[mm]` (3D).
struct MotionTrace {
    int axes = 1;
    std::vector<double> t_ms;
    std::array<std::vector<double>, 3> axis;

    std::size_t size() const { return t_ms.size(); }
    // position of sample i as a 3-vector (unused axes zero)
    std::array<double, 3> position(std::size_t i) const {
        std::array<double, 3> p{0.0, 0.0, 0.0};
        for (int ax = 0; ax < axes; ++ax)
            p[static_cast<std::size_t>(ax)] = axis[static_cast<std::size_t>(ax)][i];
        return p;
    }
};

MotionTrace parse_motion_trace(std::string_view text);
std::string write_motion_trace(const MotionTrace& trace);
MotionTrace read_motion_trace_file(const std::string& path);
void write_motion_trace_file(const std::string& path, const MotionTrace& trace);

// ---- beam lists ----------------------------------------------------------
// 1D header: `ID,Time[ms],Threshold[mm]` (symmetric band around zero).
// 3D header: `ID,Time[ms],XLow[mm],XHigh[mm],YLow[mm],YHigh[mm],ZLow[mm],ZHigh[mm]`.
struct BeamListFile {
    AxisMode mode = AxisMode::one_d;
    std::vector<BeamSpec> beams;
};

BeamListFile parse_beam_list(std::string_view text);
std::string write_beam_list(const BeamListFile& list);
BeamListFile read_beam_list_file(const std::string& path);
void write_beam_list_file(const std::string& path, const BeamListFile& list);

// ---- model declaration blocks ---------------------------------------------
// `const double period = 5088.0;` style text. Parsing accepts full checker
// declaration blocks and ignores names that are not model parameters;
// accuracy defaults to 100 and dt to 38 when absent.
MotionModel1D parse_declarations(std::string_view text);
std::string write_declarations(const MotionModel1D& model);
MotionModel1D read_declarations_file(const std::string& path);
void write_declarations_file(const std::string& path, const MotionModel1D& model);

// ---- plain file helpers ----------------------------------------------------
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace beamsched

#endif
