#include "doctest.h"

#include <cmath>
#include <cstring>

#include "beamsched/io.hpp"
#include "beamsched/rng.hpp"

using namespace beamsched;

namespace {

const char* kFig6XBlock =
    "const double period = 5088.0;\n"
    "const double drift = -0.0;\n"
    "\n"
    "double base = -3.6508;\n"
    "double a[4] = { -0.608, 0.205, 0.0744, -0.0764 };\n"
    "double b[4] = { 2.5745, -0.414, -0.0149, 0.0096 };\n";

const char* kGlobalBlock =
    "const double accuracy = 100.0;\n"
    "\n"
    "const double period = 3469.0;\n"
    "const double drift = 0.0;\n"
    "\n"
    "double base = 2.5019;\n"
    "double a[4] = { -0.1959, 0.0295, -0.0022, -0.0169 };\n"
    "double b[4] = { -0.4023, 0.0294, 0.033, 0.013 };\n"
    "\n"
    "double v[4];\n"
    "double result;\n"
    "\n"
    "double time;\n"
    "broadcast chan step;\n"
    "\n"
    "double frequency = 2 * 3.14159265358979323846 / period;\n";

bool same_bits(double x, double y) {
    return std::memcmp(&x, &y, sizeof(double)) == 0;
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("declaration block of one axis parses to its literal values") {
    const MotionModel1D m = parse_declarations(kFig6XBlock);
    CHECK(m.period_ms == 5088.0);
    CHECK(m.base == -3.6508);
    CHECK(m.a[0] == -0.608);
    CHECK(m.b[0] == 2.5745);
    CHECK(m.a[3] == -0.0764);
    CHECK(m.b[3] == 0.0096);
    CHECK(m.accuracy == 100.0); // default
    CHECK(m.dt_ms == 38.0);     // default
    CHECK(same_bits(m.drift, -0.0));
}

TEST_CASE("full global declaration block parses, extra names ignored") {
    const MotionModel1D m = parse_declarations(kGlobalBlock);
    CHECK(m.period_ms == 3469.0);
    CHECK(m.base == 2.5019);
    CHECK(m.accuracy == 100.0);
    CHECK(m.a[2] == -0.0022);
    CHECK(m.b[2] == 0.033);
}

TEST_CASE("array arity errors name the array") {
    const char* bad =
        "const double period = 5088.0;\n"
        "const double drift = 0.0;\n"
        "double base = 1.0;\n"
        "double a[3] = { 1.0, 2.0, 3.0 };\n"
        "double b[4] = { 0.0, 0.0, 0.0, 0.0 };\n";
    try {
        parse_declarations(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("'a'") != std::string::npos);
    }

    const char* mismatched =
        "const double period = 1.0;\n"
        "const double drift = 0.0;\n"
        "double base = 1.0;\n"
        "double a[4] = { 1.0, 2.0, 3.0 };\n"
        "double b[4] = { 0.0, 0.0, 0.0, 0.0 };\n";
    CHECK_THROWS_AS(parse_declarations(mismatched), ParseError);
}

TEST_CASE("missing fields are reported by name") {
    try {
        parse_declarations("const double drift = 0.0;\ndouble base = 1.0;\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("period") != std::string::npos);
    }
}

TEST_CASE("malformed numbers carry line numbers") {
    const char* bad =
        "const double period = 5088.0;\n"
        "const double drift = zero;\n";
    try {
        parse_declarations(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("write then parse is the identity on model bits") {
    MotionModel1D m = parse_declarations(kFig6XBlock);
    const std::string text = write_declarations(m);
    const MotionModel1D back = parse_declarations(text);
    CHECK(same_bits(back.period_ms, m.period_ms));
    CHECK(same_bits(back.drift, m.drift)); // signed zero preserved
    CHECK(same_bits(back.base, m.base));
    for (int k = 0; k < 4; ++k) {
        CHECK(same_bits(back.a[k], m.a[k]));
        CHECK(same_bits(back.b[k], m.b[k]));
    }
    CHECK(same_bits(back.accuracy, m.accuracy));
    CHECK(same_bits(back.dt_ms, m.dt_ms));
}

TEST_CASE("random finite doubles survive the declaration round trip") {
    Rng rng(2024);
    for (int i = 0; i < 200; ++i) {
        MotionModel1D m;
        m.period_ms = rng.uniform(1e-3, 1e7);
        m.drift = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-8.0, 2.0));
        m.base = rng.uniform(-1e6, 1e6);
        for (int k = 0; k < 4; ++k) {
            m.a[k] = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-12.0, 3.0));
            m.b[k] = rng.uniform(-1.0, 1.0) * std::pow(10.0, rng.uniform(-12.0, 3.0));
        }
        m.accuracy = rng.uniform(0.0, 100.0);
        const MotionModel1D back = parse_declarations(write_declarations(m));
        CHECK(same_bits(back.period_ms, m.period_ms));
        CHECK(same_bits(back.drift, m.drift));
        CHECK(same_bits(back.base, m.base));
        for (int k = 0; k < 4; ++k) {
            CHECK(same_bits(back.a[k], m.a[k]));
            CHECK(same_bits(back.b[k], m.b[k]));
        }
    }
}

TEST_CASE("non-finite values are rejected by the writer") {
    MotionModel1D m = parse_declarations(kFig6XBlock);
    m.base = std::nan("");
    CHECK_THROWS_AS(write_declarations(m), std::invalid_argument);
}

TEST_CASE("motion trace round trip and diagnostics") {
    MotionTrace trace;
    trace.axes = 3;
    for (int i = 0; i < 20; ++i) {
        trace.t_ms.push_back(i * 38.0);
        trace.axis[0].push_back(std::sin(i * 0.3));
        trace.axis[1].push_back(std::cos(i * 0.2) * 0.25);
        trace.axis[2].push_back(i * 0.001);
    }
    const std::string text = write_motion_trace(trace);
    const MotionTrace back = parse_motion_trace(text);
    REQUIRE(back.axes == 3);
    REQUIRE(back.size() == trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(same_bits(back.t_ms[i], trace.t_ms[i]));
        for (int ax = 0; ax < 3; ++ax)
            CHECK(same_bits(back.axis[ax][i], trace.axis[ax][i]));
    }
    CHECK(write_motion_trace(back) == text);

    SUBCASE("wrong column count is positional") {
        try {
            parse_motion_trace("t[ms],x[mm]\n0.0,1.0\n38.0,1.0,2.0\n");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("non-increasing time rejected") {
        CHECK_THROWS_AS(parse_motion_trace("t[ms],x[mm]\n0.0,1.0\n0.0,2.0\n"),
                        ParseError);
    }
    SUBCASE("unknown header rejected") {
        CHECK_THROWS_AS(parse_motion_trace("time,pos\n0.0,1.0\n"), ParseError);
    }
}

TEST_CASE("beam list round trip, both modes") {
    SUBCASE("1D") {
        const char* text =
            "ID,Time[ms],Threshold[mm]\n"
            "80731,24281.0,5.0\n"
            "76503,11222.0,5.0\n"
            "71430,1758.0,31.0\n";
        const BeamListFile list = parse_beam_list(text);
        REQUIRE(list.mode == AxisMode::one_d);
        REQUIRE(list.beams.size() == 3);
        CHECK(list.beams[0].id == 80731);
        CHECK(list.beams[0].remaining_ms == 24281.0);
        CHECK(list.beams[0].bounds[0].lower_mm == -5.0);
        CHECK(list.beams[0].bounds[0].upper_mm == 5.0);
        CHECK(write_beam_list(list) == text);
    }
    SUBCASE("3D") {
        BeamListFile list;
        list.mode = AxisMode::three_d;
        BeamSpec beam;
        beam.id = 42;
        beam.remaining_ms = 1500.0;
        beam.bounds = {{-4.0, 6.0}, {-3.0, 3.0}, {-2.0, 2.0}};
        list.beams.push_back(beam);
        const std::string text = write_beam_list(list);
        const BeamListFile back = parse_beam_list(text);
        REQUIRE(back.mode == AxisMode::three_d);
        CHECK(back.beams[0].bounds[0].lower_mm == -4.0);
        CHECK(back.beams[0].bounds[0].upper_mm == 6.0);
        CHECK(write_beam_list(back) == text);
    }
    SUBCASE("duplicate ids rejected") {
        CHECK_THROWS_AS(
            parse_beam_list("ID,Time[ms],Threshold[mm]\n1,100.0,5.0\n1,50.0,2.0\n"),
            ParseError);
    }
    SUBCASE("nonpositive time rejected") {
        CHECK_THROWS_AS(parse_beam_list("ID,Time[ms],Threshold[mm]\n1,0.0,5.0\n"),
                        ParseError);
    }
    SUBCASE("inverted 3D bounds rejected") {
        const std::string header =
            "ID,Time[ms],XLow[mm],XHigh[mm],YLow[mm],YHigh[mm],ZLow[mm],ZHigh[mm]\n";
        CHECK_THROWS_AS(parse_beam_list(header + "1,100.0,2.0,-2.0,0.0,1.0,0.0,1.0\n"),
                        ParseError);
    }
}

} // TEST_SUITE
