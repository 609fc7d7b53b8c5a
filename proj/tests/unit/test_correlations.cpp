#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "pne/core/errors.hpp"
#include "pne/correlations/hom.hpp"
#include "pne/correlations/maps.hpp"
#include "pne/correlations/quadrant.hpp"
#include "pne/mps/mps.hpp"

using namespace pne;

namespace {

const double kT1 = 136.0;
const double kHalf = kT1 * std::log(2.0);

FieldState ideal_phi_plus() {
    AtomParams atom;
    PulseSequence seq;
    seq.n_pulses = 2;
    seq.separations = {kHalf};
    const TimeGrid grid = default_grid(atom, seq, 1.0);
    return ideal_field_state(build_state(atom, seq), atom, seq, grid);
}

FieldState exponential_photon(double step = 0.5) {
    AtomParams atom;
    const TimeGrid grid{0.0, step, static_cast<std::size_t>(12.0 * kT1 / step)};
    FieldState f;
    f.grid = grid;
    f.psi1 = exponential_bin_mode(grid, atom.gamma, 0.0, grid.end());
    f.phi = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.n_points), static_cast<Eigen::Index>(grid.n_points));
    return f;
}

}  // namespace

TEST_CASE("ideal phi+ quadrants at the half-life") {
    const MapSet maps = build_maps(ideal_phi_plus(), 0.0);
    const QuadrantSummary q = quadrant_reduce(maps, kHalf);
    CHECK(std::abs(q.mu_bar[0] - 0.5) < 1e-9);
    CHECK(std::abs(q.mu_bar[1] - 0.5) < 1e-9);
    CHECK(std::abs(q.M_total - 0.5) < 1e-9);
    CHECK(std::abs(q.g2_total - 1.0) < 1e-9);
    CHECK(std::abs(q.c2_total - 0.5) < 1e-9);
    CHECK(std::abs(*q.g2[0][0]) < 1e-9);
    CHECK(std::abs(*q.g2[1][1]) < 1e-9);
    CHECK(std::abs(*q.g2[0][1] - 2.0) < 1e-9);
    CHECK(std::abs(*q.g2[1][0] - 2.0) < 1e-9);
    CHECK(std::abs(*q.c2[0][1] - 1.0) < 1e-9);
    CHECK(q.c1 < 1e-12);
}

TEST_CASE("quadrant sums reproduce the totals for any threshold") {
    const MapSet maps = build_maps(ideal_phi_plus(), 0.002);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(10.0, 400.0);
    for (int trial = 0; trial < 20; ++trial) {
        const QuadrantSummary q = quadrant_reduce(maps, u(rng));
        CHECK(q.mu_bar[0] + q.mu_bar[1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(QuadrantSummary::weighted_average(q, q.g2) == doctest::Approx(q.g2_total).epsilon(1e-9));
        CHECK(QuadrantSummary::weighted_average(q, q.M) == doctest::Approx(q.M_total).epsilon(1e-9));
        CHECK(QuadrantSummary::weighted_average(q, q.c2) == doctest::Approx(q.c2_total).epsilon(1e-9));
    }
    CHECK_THROWS_AS(quadrant_reduce(maps, -1.0), ValidationError);
    CHECK_THROWS_AS(quadrant_reduce(maps, maps.grid.end() + 1.0), ValidationError);
}

TEST_CASE("maps are symmetric, non-negative and normalised") {
    const FieldState f = ideal_phi_plus();
    const MapSet maps = build_maps(f, 0.001, true);
    for (const CorrelationMap* m : {&maps.nn, &maps.g2, &maps.g1sq, &maps.c2sq}) CHECK_NOTHROW(m->validate(1e-12));
    REQUIRE(maps.cminus);
    CHECK_NOTHROW(maps.cminus->validate(1e-12));
    CHECK(maps.nn.integral() == doctest::Approx(maps.mu() * maps.mu()).epsilon(1e-12));
    // Second factorial moment: int G2 = 2 p2.
    CHECK(maps.g2.integral() == doctest::Approx(2.0 * f.p2()).epsilon(1e-9));
}

TEST_CASE("pure dephasing sets the single-photon indistinguishability") {
    const double gamma = 1.0 / kT1;
    for (double ratio : {0.0, 0.11, 0.5}) {
        const MapSet maps = build_maps(exponential_photon(2.0), ratio * gamma);
        const double M = maps.g1sq.integral() / (maps.mu() * maps.mu());
        CHECK(M == doctest::Approx(1.0 / (1.0 + 2.0 * ratio)).epsilon(1e-3));
        CHECK(maps.g2.integral() == 0.0);
    }
}

TEST_CASE("jitter kernel and convolution") {
    const TimeGrid grid{0.0, 2.0, 400};
    const Eigen::MatrixXd k = jitter_kernel(grid, 50.0);
    // Columns far from the edges carry the whole Gaussian.
    for (Eigen::Index j = 60; j < 340; j += 37) CHECK(k.col(j).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK((k.colwise().sum().array() <= 1.0 + 1e-12).all());
    CHECK((k.array() >= 0.0).all());

    const MapSet maps = build_maps(exponential_photon(2.0), 0.0005);
    const CorrelationMap blurred = apply_jitter(maps.g1sq, 50.0);
    CHECK_NOTHROW(blurred.validate(1e-10));
    // Edge columns are renormalised, so nothing leaks out of the grid.
    CHECK(blurred.integral() == doctest::Approx(maps.g1sq.integral()).epsilon(1e-9));
    const CorrelationMap same = apply_jitter(maps.g1sq, 0.0);
    CHECK(same.values == maps.g1sq.values);

    // Away from edges a narrow bump keeps its weight and widens by sqrt(fwhm^2 + w^2).
    Eigen::VectorXd bump = Eigen::VectorXd::Zero(400);
    bump(200) = 1.0;
    const Eigen::VectorXd wide = apply_jitter(grid, bump, 50.0);
    CHECK(wide.sum() == doctest::Approx(1.0).epsilon(1e-9));
    double m2 = 0.0;
    for (Eigen::Index i = 0; i < 400; ++i) m2 += wide(i) * std::pow(grid.center(static_cast<std::size_t>(i)) - grid.center(200), 2);
    const double sigma = 50.0 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    CHECK(std::sqrt(m2) == doctest::Approx(std::sqrt(sigma * sigma + grid.step * grid.step / 12.0)).epsilon(0.02));
    CHECK_THROWS_AS(apply_jitter(maps.g1sq, -1.0), ValidationError);
}

TEST_CASE("HOM map integrates to the closed form") {
    const MapSet maps = build_maps(ideal_phi_plus(), 0.0, true);
    const double mu2 = maps.mu() * maps.mu();
    const double M = maps.g1sq.integral() / mu2, g2 = maps.g2.integral() / mu2, c2 = maps.c2sq.integral() / mu2;
    const double cm = maps.cminus->integral() / mu2;
    double lo = 1e9, hi = -1e9;
    for (int k = 0; k <= 64; ++k) {
        const double phi = 2.0 * M_PI * k / 64.0;
        const double direct = hom_map(maps, phi).integral() / mu2;
        CHECK(direct == doctest::Approx(hom_g2(phi, M, g2, c2, cm)).epsilon(1e-9));
        lo = std::min(lo, direct);
        hi = std::max(hi, direct);
    }
    CHECK(std::abs(lo - 0.5) < 1e-9);
    CHECK(std::abs(hi - 1.0 / maps.mu()) < 1e-9);
}

TEST_CASE("map IO round trips") {
    const MapSet maps = build_maps(exponential_photon(8.0), 0.001);
    std::stringstream bin;
    write_map_binary(bin, maps.g1sq);
    const CorrelationMap back = read_map_binary(bin, MapKind::AbsG1Sq);
    CHECK(back.grid == maps.g1sq.grid);
    CHECK(back.values == maps.g1sq.values);
    std::stringstream truncated(bin.str().substr(0, 20));
    CHECK_THROWS(read_map_binary(truncated));

    std::ostringstream csv;
    write_map_csv(csv, maps.g1sq, 4);
    std::size_t lines = 0;
    for (char c : csv.str()) lines += c == '\n';
    const std::size_t per_axis = (maps.grid.n_points + 3) / 4;
    CHECK(lines == per_axis * per_axis + 1);
}

TEST_CASE("self-homodyne phase fit") {
    const double c1 = 0.3, a = 0.62, b = 0.8;
    std::vector<std::pair<double, double>> pts;
    for (int k = 0; k < 12; ++k) {
        const double i = self_homodyne(c1, 0.5 * k).i_sh;
        pts.emplace_back(i, a - b * i * i);
    }
    const PhaseFit f = fit_phase_quadratic(pts, c1, 0.1);
    CHECK(f.offset == doctest::Approx(a).epsilon(1e-12));
    CHECK(f.curvature == doctest::Approx(b).epsilon(1e-10));
    CHECK(f.c2 == doctest::Approx(b * c1 * c1).epsilon(1e-10));
    CHECK(f.M == doctest::Approx(1.0 + 0.1 + f.c2 - 2.0 * a).epsilon(1e-10));
    CHECK(f.residual_se < 1e-10);
    CHECK_THROWS_AS(fit_phase_quadratic({{0.1, 1.0}, {-0.1, 1.0}}, c1), NumericalError);

    const SelfHomodyne s = self_homodyne(0.4, M_PI / 3.0, 2.0);
    CHECK(s.i_sh == doctest::Approx(0.2));
    CHECK(s.mu_plus * s.mu_minus / 4.0 == doctest::Approx(s.normalization));
    CHECK(phase_averaged_bias(0.4) == doctest::Approx(0.08));
    CHECK_THROWS_AS(self_homodyne(1.5, 0.0), ValidationError);

    const HomOverlap o = overlap_from_hom(0.1, 0.02);
    CHECK(o.M == doctest::Approx(0.82));
    REQUIRE(o.M_s);
    CHECK(*o.M_s == doctest::Approx(0.82 / 0.98));
    CHECK_FALSE(overlap_from_hom(0.5, 1.0).M_s);
}
