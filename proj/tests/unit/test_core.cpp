#include <doctest.h>

#include <cmath>

#include "pne/core/config.hpp"
#include "pne/core/errors.hpp"
#include "pne/core/photonic_state.hpp"
#include "pne/core/types.hpp"

using namespace pne;

TEST_CASE("config defaults") {
    const Config c = parse_config("");
    CHECK(c.t1 == 136.0);
    CHECK(c.atom.gamma == doctest::Approx(1.0 / 136.0));
    CHECK(c.sequence.n_pulses == 1);
    CHECK(c.sequence.pulse_width == 0.0);
    CHECK(c.options.grid_step == 1.0);
}

TEST_CASE("config round trip is exact") {
    const std::string text =
        "T1: 136.5\ntp: 20\ndt: [94.26801655615256, 150.1]\ngamma_star: 0.000808823529\n"
        "grid_step: 0.5\njitter_fwhm: 50\nseed: 42\nbackground_rate: 1e-7\n";
    const Config a = parse_config(text);
    CHECK(a.sequence.n_pulses == 3);
    const Config b = parse_config(serialize_config(a));
    CHECK(a == b);
    CHECK(serialize_config(a) == serialize_config(b));
}

TEST_CASE("config accepts JSON") {
    const Config c = parse_config(R"({"T1": 100, "dt": [69.3]})");
    CHECK(c.sequence.n_pulses == 2);
    CHECK(c.atom.gamma == doctest::Approx(0.01));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("T1: [1, 2"), ParseError);
    CHECK_THROWS_AS(parse_config("T2: 5"), ParseError);
    CHECK_THROWS_AS(parse_config("dt: 5x"), ParseError);
    CHECK_THROWS_AS(parse_config("- 1\n- 2\n"), ParseError);
    CHECK_THROWS_AS(parse_config("T1: -1"), ValidationError);
    CHECK_THROWS_AS(parse_config("gamma_star: -0.1"), ValidationError);
    CHECK_THROWS_AS(parse_config("tp: 20\ndt: [10]"), ValidationError);
    CHECK_THROWS_AS(parse_config("grid_step: 0"), ValidationError);
    try {
        parse_config("T1: 1\nfoo: 2\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    try {
        parse_config("jitter_fwhm: -3");
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "jitter_fwhm");
    }
}

TEST_CASE("pulse sequence bookkeeping") {
    PulseSequence s;
    s.n_pulses = 3;
    s.separations = {100.0, 50.0};
    s.pulse_width = 10.0;
    s.validate();
    CHECK(s.separation_from_end(2) == 50.0);
    CHECK(s.separation_from_end(3) == 100.0);
    const auto starts = s.pulse_starts();
    REQUIRE(starts.size() == 3);
    CHECK(starts[1] == 100.0);
    CHECK(starts[2] == 150.0);
    CHECK(s.effective_rabi() == doctest::Approx(M_PI / 10.0));
    CHECK(s.total_separation() == 150.0);
    s.separations = {100.0};
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("default grid aligns pulse edges") {
    AtomParams atom;
    PulseSequence s;
    s.n_pulses = 2;
    s.separations = {94.3};
    s.pulse_width = 20.0;
    const TimeGrid g = default_grid(atom, s, 1.0);
    CHECK(g.step <= 1.0);
    CHECK(g.end() >= 10.0 * 136.0 + 94.3 - 1e-9);
    for (double edge : {20.0, 94.3, 114.3}) {
        const double k = edge / g.step;
        CHECK(std::abs(k - std::round(k)) < 1e-6);
    }
}

TEST_CASE("photonic state validation") {
    CHECK(matches_vacuum_pair_pattern(""));
    CHECK(matches_vacuum_pair_pattern("1001"));
    CHECK_FALSE(matches_vacuum_pair_pattern("010"));
    CHECK_THROWS_AS(PhotonicState(3, {{"010", 1.0}}), ValidationError);
    CHECK_THROWS_AS(PhotonicState(2, {{"1", 1.0}}), ValidationError);
    CHECK_THROWS_AS(PhotonicState(2, {{"12", 1.0}}), ValidationError);
    const PhotonicState s(2, {{"00", 3.0}, {"11", cplx(0.0, 4.0)}});
    CHECK_FALSE(s.is_normalized());
    const PhotonicState n = normalize(s);
    CHECK(n.is_normalized());
    CHECK(std::abs(n.amplitude("11") - cplx(0.0, 0.8)) < 1e-15);
    CHECK(n.amplitude("01") == cplx(0.0, 0.0));
    CHECK_THROWS_AS(normalize(PhotonicState(1, {{"1", 0.0}})), ValidationError);
}

TEST_CASE("time bin partition validation") {
    TimeGrid g{0.0, 1.0, 100};
    TimeBinPartition p{{10.0, 20.0}};
    p.validate(&g);
    p.thresholds = {20.0, 10.0};
    CHECK_THROWS_AS(p.validate(&g), ValidationError);
    p.thresholds = {10.0, 200.0};
    CHECK_THROWS_AS(p.validate(&g), ValidationError);
}
