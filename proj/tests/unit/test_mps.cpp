#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pne/core/errors.hpp"
#include "pne/mps/mps.hpp"

using namespace pne;

namespace {

PulseSequence seq_of(const std::vector<double>& dt) {
    PulseSequence s;
    s.n_pulses = static_cast<int>(dt.size()) + 1;
    s.separations = dt;
    return s;
}

}  // namespace

TEST_CASE("term counts match brute-force enumeration up to N = 20") {
    for (int n = 0; n <= 20; ++n) {
        std::uint64_t count = 0;
        std::string s(static_cast<std::size_t>(n), '0');
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
            for (int b = 0; b < n; ++b) s[static_cast<std::size_t>(b)] = (mask >> b) & 1 ? '1' : '0';
            if (oracle::vacuum_pair_word(s)) ++count;
        }
        CHECK(count_terms(n) == count);
    }
    CHECK_THROWS_AS(count_terms(-1), ValidationError);
    CHECK_THROWS_AS(count_terms(100), ValidationError);
}

TEST_CASE("N = 4 yields exactly five bitstrings") {
    const PhotonicState s = build_state(AtomParams{}, seq_of({50.0, 50.0, 50.0}));
    std::vector<std::string> keys;
    for (const auto& kv : s.amplitudes()) keys.push_back(kv.first);
    CHECK(keys == std::vector<std::string>{"0000", "0011", "1001", "1100", "1111"});
}

TEST_CASE("build_state agrees with sequential propagation") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(5.0, 400.0);
    AtomParams atom;
    for (int n = 1; n <= 9; ++n) {
        std::vector<double> dt(static_cast<std::size_t>(n - 1));
        for (double& d : dt) d = u(rng);
        const PhotonicState s = build_state(atom, seq_of(dt));
        const auto ref = oracle::sequential_state(atom.gamma, dt);
        CHECK(s.size() == ref.size());
        CHECK(s.size() == count_terms(n));
        for (const auto& [bits, amp] : ref) CHECK(std::abs(s.amplitude(bits) - cplx(amp, 0.0)) < 1e-13);
        CHECK(s.is_normalized(1e-12));
    }
}

TEST_CASE("Bell and W limits") {
    AtomParams atom;
    const double t1 = 136.0;
    const PhotonicState bell = build_state(atom, seq_of({t1 * std::log(2.0)}));
    CHECK(std::abs(bell.amplitude("00").real() - M_SQRT1_2) < 1e-12);
    CHECK(std::abs(bell.amplitude("11").real() - M_SQRT1_2) < 1e-12);

    for (int n = 2; n <= 12; ++n) {
        const GoldenSchedule g = golden_schedule(n, t1);
        const PhotonicState s = build_state(atom, g.sequence());
        CHECK(s.size() == g.fib.back());
        const double expect = 1.0 / std::sqrt(static_cast<double>(g.fib.back()));
        for (const auto& kv : s.amplitudes()) CHECK(std::abs(kv.second.real() - expect) < 1e-12);
    }
    const GoldenSchedule g3 = golden_schedule(3, t1);
    CHECK(g3.delta_t(2) == doctest::Approx(t1 * std::log(2.0)));
    CHECK_THROWS_AS(golden_schedule(1, t1), ValidationError);
}

TEST_CASE("vacuum and single pulse") {
    PulseSequence none;
    none.n_pulses = 0;
    const PhotonicState v = build_state(AtomParams{}, none);
    CHECK(v.n_bins() == 0);
    CHECK(v.amplitude("") == cplx(1.0, 0.0));
    const PhotonicState one = build_state(AtomParams{}, seq_of({}));
    CHECK(one.size() == 1);
    CHECK(one.amplitude("1") == cplx(1.0, 0.0));
    PulseSequence wide = seq_of({100.0});
    wide.pulse_width = 5.0;
    CHECK_THROWS_AS(build_state(AtomParams{}, wide), ValidationError);
}

TEST_CASE("Schmidt coefficients match a dense SVD and never exceed two") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(20.0, 300.0);
    AtomParams atom;
    for (int n = 2; n <= 8; ++n) {
        std::vector<double> dt(static_cast<std::size_t>(n - 1));
        for (double& d : dt) d = u(rng);
        const PhotonicState s = build_state(atom, seq_of(dt));
        for (std::size_t cut = 1; cut < static_cast<std::size_t>(n); ++cut) {
            const std::size_t rows = std::size_t{1} << cut, cols = std::size_t{1} << (n - cut);
            Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
            for (const auto& [bits, a] : s.amplitudes()) {
                const auto r = std::stoull(bits.substr(0, cut), nullptr, 2);
                const auto c = std::stoull(bits.substr(cut), nullptr, 2);
                dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a.real();
            }
            const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(dense).singularValues();
            const Eigen::VectorXd got = bipartition_amplitudes(s, cut);
            CHECK(got.size() <= 2);
            for (Eigen::Index k = 0; k < got.size(); ++k) CHECK(std::abs(got(k) - sv(k)) < 1e-12);
            for (Eigen::Index k = got.size(); k < sv.size(); ++k) CHECK(sv(k) < 1e-12);
        }
    }
}

TEST_CASE("state JSON round trip") {
    const PhotonicState s = build_state(AtomParams{}, seq_of({60.0, 80.0, 70.0}));
    const PhotonicState back = state_from_json(state_to_json(s));
    CHECK(back == s);
}

TEST_CASE("W-state thresholds") {
    const TimeBinPartition p = w_state_thresholds(4, 136.0);
    REQUIRE(p.thresholds.size() == 3);
    for (int m = 1; m <= 3; ++m) CHECK(p.thresholds[m - 1] == doctest::Approx(136.0 * std::log(4.0 / (4.0 - m))));
    // Each bin carries 1/N of an exponential photon.
    double prev = 0.0;
    for (double t : p.thresholds) {
        CHECK(std::exp(-prev / 136.0) - std::exp(-t / 136.0) == doctest::Approx(0.25));
        prev = t;
    }
}
