#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pne/core/errors.hpp"
#include "pne/dynamics/collision.hpp"
#include "pne/dynamics/dynamics.hpp"
#include "pne/mps/mps.hpp"

using namespace pne;

namespace {

/// Explicit amplitude bookkeeping over (atom, first emission step, second emission step)
/// with one drive rotation and one damping collision per step. O(n^2) memory, so only for
/// short runs.
struct DenseCollision {
    double p0 = 0.0, p1 = 0.0, p2 = 0.0;
    Eigen::VectorXd a1;  ///< one-photon amplitudes, atom in g
    Eigen::MatrixXd a2;  ///< two-photon amplitudes for n < m, atom in g
};

DenseCollision dense_collision(double gamma, double omega, const std::vector<double>& starts, double tp, double dt,
                               std::size_t steps) {
    const double keep = std::exp(-0.5 * gamma * dt);
    const double emit = std::sqrt(1.0 - keep * keep);
    const auto n = static_cast<Eigen::Index>(steps);
    const double last_end = starts.empty() ? 0.0 : starts.back() + tp;
    double g0 = 1.0, e0 = 0.0;
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(n), e1 = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(n, n), e2 = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double mid = (static_cast<double>(k) + 0.5) * dt;
        double th = 0.0;
        for (double s : starts)
            if (mid >= s && mid < s + tp) th = 0.5 * omega * dt;
        const double c = std::cos(th), s = std::sin(th);
        auto rot = [&](double& g, double& e) {
            const double ng = c * g - s * e, ne = s * g + c * e;
            g = ng;
            e = ne;
        };
        if (th != 0.0) {
            rot(g0, e0);
            for (Eigen::Index i = 0; i < k; ++i) {
                rot(g1(i), e1(i));
                for (Eigen::Index j = i + 1; j < k; ++j) rot(g2(i, j), e2(i, j));
            }
        }
        // Damping: an excited atom emits into step k or stays excited. Two-photon branches
        // only matter while a later rotation can bring them back to g.
        const bool drive_ahead = mid < last_end;
        for (Eigen::Index i = 0; i < k; ++i) {
            g2(i, k) = emit * e1(i);
            e1(i) *= keep;
            if (drive_ahead)
                for (Eigen::Index j = i + 1; j < k; ++j) e2(i, j) *= keep;  // third photons are dropped
        }
        g1(k) = emit * e0;
        e0 *= keep;
    }
    DenseCollision d;
    d.p0 = g0 * g0;
    d.p1 = g1.squaredNorm();
    d.p2 = g2.squaredNorm();
    d.a1 = g1;
    d.a2 = g2;
    return d;
}

}  // namespace

TEST_CASE("collision model decays at the radiative rate") {
    AtomParams atom;
    PulseSequence none;
    none.n_pulses = 0;
    const double dt = 0.01 / atom.gamma;
    const CollisionResult r = collision_evolve(atom, none, dt, InitialAtom::Excited, 5.0 / atom.gamma);
    double worst = 0.0;
    for (std::size_t k = 0; k < r.n_steps; ++k) {
        const double t = static_cast<double>(k + 1) * dt;
        worst = std::max(worst, std::abs(r.excited_population(static_cast<Eigen::Index>(k)) - std::exp(-atom.gamma * t)));
    }
    CHECK(worst < 1e-3);
    CHECK(r.p1 == doctest::Approx(1.0 - std::exp(-5.0)).epsilon(1e-9));
}

TEST_CASE("collision model matches explicit amplitude propagation") {
    AtomParams atom;
    for (const auto& [tp, dts] : std::vector<std::pair<double, std::vector<double>>>{{10.0, {}}, {8.0, {50.0}}, {8.0, {40.0, 45.0}}}) {
        PulseSequence seq;
        seq.n_pulses = static_cast<int>(dts.size()) + 1;
        seq.separations = dts;
        seq.pulse_width = tp;
        const double dt = 0.1;
        const double t_end = 200.0;
        const CollisionResult r = collision_evolve(atom, seq, dt, InitialAtom::Ground, t_end);
        const DenseCollision d = dense_collision(atom.gamma, M_PI / tp, seq.pulse_starts(), tp, dt, r.n_steps);
        CHECK(r.p0 == doctest::Approx(d.p0).epsilon(1e-10));
        CHECK(r.p1 == doctest::Approx(d.p1).epsilon(1e-10));
        CHECK(r.p2 == doctest::Approx(d.p2).epsilon(1e-10));
        CHECK((r.one_photon.cwiseAbs() - d.a1.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((r.two_photon_dense().cwiseAbs() - d.a2.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("collision step limits") {
    AtomParams atom;
    PulseSequence seq;
    seq.pulse_width = 2.0;
    CHECK_THROWS_AS(collision_evolve(atom, seq, 0.1), ValidationError);
    PulseSequence two;
    two.n_pulses = 2;
    two.separations = {0.05};
    CHECK_THROWS_AS(collision_evolve(atom, two, 0.1), ValidationError);
}

TEST_CASE("single-pulse closed form agrees with the collision model for short pulses") {
    AtomParams atom;
    for (double tp : {5.0, 10.0}) {
        PulseSequence seq;
        seq.pulse_width = tp;
        const TimeGrid grid = default_grid(atom, seq, 0.5);
        const TemporalWavefunctions w = single_pulse(atom, 0.0, tp, grid);
        const CollisionResult r = collision_evolve(atom, seq, 0.01);
        CHECK(w.p1 == doctest::Approx(r.p1).epsilon(0.02));
        CHECK(w.p2 == doctest::Approx(r.p2).epsilon(0.02));
        CHECK(w.f1.squaredNorm() * grid.step == doctest::Approx(1.0).epsilon(1e-9));
        const FieldState f = w.field_state();
        f.validate();
        CHECK(f.p1() == doctest::Approx(w.p1).epsilon(1e-9));
        CHECK(f.p2() == doctest::Approx(w.p2).epsilon(1e-9));
    }
    PulseSequence seq;
    seq.pulse_width = 20.0;
    const TimeGrid coarse{0.0, 5.0, 300};
    CHECK_THROWS_AS(single_pulse(atom, 0.0, 20.0, coarse), NumericalError);
}

TEST_CASE("two-pulse closed form limits") {
    const double gamma = 1.0 / 136.0;
    const double dt = 136.0 * std::log(2.0);
    const BinProbabilities b = two_pulse_closed_form(gamma, 1e-7, dt);
    CHECK(std::abs(b.p0 - 0.5) < 1e-6);
    CHECK(std::abs(b.p11 - 0.5) < 1e-6);
    CHECK(std::abs(b.p1()) < 1e-6);
    CHECK(std::abs(b.p20) < 1e-6);
    // Re-excitation grows with the pulse width.
    CHECK(two_pulse_closed_form(gamma, 20.0, dt).p1() > two_pulse_closed_form(gamma, 5.0, dt).p1());
}

TEST_CASE("two-pulse decomposition at short pulses") {
    AtomParams atom;
    const double dt = 136.0 * std::log(2.0);
    PulseSequence seq;
    seq.n_pulses = 2;
    seq.separations = {dt};
    seq.pulse_width = 5.0;
    const TimeGrid grid = default_grid(atom, seq, 0.5);
    const TwoPulseDecomposition d = two_pulse(atom, 0.0, 5.0, dt, grid);
    CHECK(d.threshold == doctest::Approx(dt + 5.0));
    CHECK(d.simulated.p0 == doctest::Approx(d.closed_form.p0).epsilon(0.02));
    CHECK(d.simulated.p11 == doctest::Approx(d.closed_form.p11).epsilon(0.02));
    CHECK(d.separability < 0.05);
    d.field.validate();
    CHECK(d.field.p0() + d.field.p1() + d.field.p2() + d.field.deficit == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ideal field state of a phi+ sequence") {
    AtomParams atom;
    PulseSequence seq;
    seq.n_pulses = 2;
    seq.separations = {136.0 * std::log(2.0)};
    const TimeGrid grid = default_grid(atom, seq, 1.0);
    const FieldState f = ideal_field_state(build_state(atom, seq), atom, seq, grid);
    f.validate();
    CHECK(f.p0() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.p1() < 1e-14);
    CHECK(f.p2() == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(f.mean_photon_number() == doctest::Approx(1.0).epsilon(1e-9));
    // Exponential modes are normalised on the cells.
    const Eigen::VectorXcd m = exponential_bin_mode(grid, atom.gamma, 0.0, 100.0);
    CHECK(m.squaredNorm() * grid.step == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("overlap fraction and wavefunction table") {
    CHECK(overlap_fraction(1.0 / 136.0, 20.0, 50.0) == doctest::Approx(0.1485).epsilon(1e-3));
    CHECK(overlap_fraction(1.0 / 136.0, 0.0, 0.0) == 0.0);
    CHECK_THROWS_AS(overlap_fraction(0.0, 1.0, 1.0), ValidationError);
    TimeGrid g{0.0, 1.0, 3};
    Eigen::VectorXcd f(3);
    f << 1.0, cplx(0.0, 1.0), 0.0;
    std::ostringstream os;
    write_wavefunction_csv(os, g, f);
    CHECK(os.str().rfind("t,re_f1,im_f1,abs2_f1\n0.5,1,0,1\n", 0) == 0);
    CHECK_THROWS_AS(write_wavefunction_csv(os, g, Eigen::VectorXcd(2)), ValidationError);
}
