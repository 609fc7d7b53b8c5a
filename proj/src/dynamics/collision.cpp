#include "pne/dynamics/collision.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "pne/core/errors.hpp"

namespace pne {

namespace {

Eigen::Matrix2d rotation(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

}  // namespace

double CollisionResult::two_photon_amplitude(std::size_t n, std::size_t m) const {
    if (n >= m || m >= n_steps) return 0.0;
    return lead.row(static_cast<Eigen::Index>(n)).dot(trail.row(static_cast<Eigen::Index>(m)));
}

Eigen::MatrixXd CollisionResult::two_photon_dense() const {
    if (n_steps > 8000) throw NumericalError("dense two-photon amplitude limited to 8000 steps");
    const auto s = static_cast<Eigen::Index>(n_steps);
    Eigen::MatrixXd a = lead * trail.transpose();
    for (Eigen::Index n = 0; n < s; ++n) a.row(n).head(n + 1).setZero();
    return a;
}

double CollisionResult::one_photon_probability(std::size_t begin, std::size_t end) const {
    end = std::min(end, n_steps);
    if (begin >= end) return 0.0;
    return one_photon.segment(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin))
        .squaredNorm();
}

double CollisionResult::two_photon_probability(std::size_t a0, std::size_t a1, std::size_t b0,
                                               std::size_t b1) const {
    a1 = std::min(a1, n_steps);
    b1 = std::min(b1, n_steps);
    Eigen::Matrix2d w = Eigen::Matrix2d::Zero();
    std::size_t n = a0;
    double p = 0.0;
    for (std::size_t m = b0; m < b1; ++m) {
        for (; n < std::min(a1, m); ++n) {
            const Eigen::RowVector2d l = lead.row(static_cast<Eigen::Index>(n));
            w.noalias() += l.transpose() * l;
        }
        const Eigen::RowVector2d t = trail.row(static_cast<Eigen::Index>(m));
        p += t * w * t.transpose();
    }
    return p;
}

FieldState CollisionResult::to_field_state(const TimeGrid& grid) const {
    grid.validate();
    if (std::abs(grid.start) > 1e-12) throw ValidationError("grid", "projection needs grid.start = 0");
    const double ratio = grid.step / delta_t;
    const auto k = static_cast<std::size_t>(std::llround(ratio));
    if (k == 0 || std::abs(ratio - static_cast<double>(k)) > 1e-6 * ratio) {
        throw ValidationError("grid_step", "must be an integer multiple of the collision step");
    }
    const auto nc = static_cast<Eigen::Index>(grid.n_points);
    const double h = grid.step;
    const double kd = static_cast<double>(k);

    Eigen::VectorXcd psi1 = Eigen::VectorXcd::Zero(nc);
    Eigen::MatrixX2d lead_sum = Eigen::MatrixX2d::Zero(nc, 2);
    Eigen::MatrixX2d trail_sum = Eigen::MatrixX2d::Zero(nc, 2);
    Eigen::VectorXd same_cell = Eigen::VectorXd::Zero(nc);  // sum over n < m inside one cell
    for (Eigen::Index c = 0; c < nc; ++c) {
        const std::size_t first = static_cast<std::size_t>(c) * k;
        if (first >= n_steps) break;
        const std::size_t last = std::min(first + k, n_steps);
        Eigen::RowVector2d prefix = Eigen::RowVector2d::Zero();
        double a1 = 0.0;
        for (std::size_t n = first; n < last; ++n) {
            const auto i = static_cast<Eigen::Index>(n);
            a1 += one_photon(i);
            same_cell(c) += prefix.dot(trail.row(i));
            prefix += lead.row(i);
            trail_sum.row(c) += trail.row(i);
        }
        lead_sum.row(c) = prefix;
        psi1(c) = a1 / std::sqrt(kd * h);
    }

    FieldState fs;
    fs.grid = grid;
    fs.c0 = vacuum;
    fs.psi1 = std::move(psi1);
    const double off = 1.0 / (std::sqrt(2.0) * kd * h);
    Eigen::MatrixXd upper = (lead_sum * trail_sum.transpose()) * off;
    Eigen::MatrixXcd phi(nc, nc);
    for (Eigen::Index j = 0; j < nc; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            phi(i, j) = upper(i, j);
            phi(j, i) = upper(i, j);
        }
        phi(j, j) = std::sqrt(2.0) * same_cell(j) / (kd * h);
    }
    fs.phi = std::move(phi);
    fs.deficit = std::max(0.0, 1.0 - fs.p0() - fs.p1() - fs.p2());
    return fs;
}

CollisionResult collision_evolve(const AtomParams& atom, const PulseSequence& seq, double delta_t,
                                 InitialAtom initial, double t_end) {
    atom.validate();
    seq.validate();
    const double omega = seq.effective_rabi();
    if (!(delta_t > 0.0) || delta_t * std::max(atom.gamma, omega) >= 0.05) {
        throw ValidationError("delta_t", "collision step must satisfy dt * max(gamma, Omega) < 0.05");
    }
    const std::vector<double> starts = seq.pulse_starts();
    const double last_end = starts.empty() ? 0.0 : starts.back() + seq.pulse_width;
    if (t_end <= 0.0) t_end = last_end + 12.0 / atom.gamma;
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / delta_t - 1e-9));
    if (steps < 2) throw ValidationError("delta_t", "run shorter than two steps");

    // Rotation angle per step.
    std::vector<double> theta(steps, 0.0);
    if (seq.pulse_width > 0.0) {
        const double half = 0.5 * omega * delta_t;
        for (std::size_t k = 0; k < steps; ++k) {
            const double mid = (static_cast<double>(k) + 0.5) * delta_t;
            for (double s : starts) {
                if (mid >= s && mid < s + seq.pulse_width) theta[k] = half;
            }
        }
    } else {
        for (double s : starts) {
            const auto k = static_cast<std::size_t>(std::floor(s / delta_t + 1e-9));
            if (k >= steps) continue;
            if (theta[k] != 0.0) throw ValidationError("dt", "two pulses fall inside one collision step");
            theta[k] = 0.5 * M_PI;
        }
    }

    const double cdec = std::exp(-0.5 * atom.gamma * delta_t);
    const double s = std::sqrt(-std::expm1(-atom.gamma * delta_t));
    const Eigen::Matrix2d kmat = Eigen::Vector2d(1.0, cdec).asDiagonal();
    const Eigen::Matrix2d kinv = Eigen::Vector2d(1.0, 1.0 / cdec).asDiagonal();

    CollisionResult res;
    res.delta_t = delta_t;
    res.n_steps = steps;
    const auto ns = static_cast<Eigen::Index>(steps);
    res.one_photon.resize(ns);
    res.lead.resize(ns, 2);
    res.trail.resize(ns, 2);
    res.excited_population.resize(ns);

    Eigen::VectorXd cfirst(ns);
    Eigen::MatrixX2d rrow(ns, 2);
    Eigen::Vector2d a = initial == InitialAtom::Ground ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d(0.0, 1.0);
    Eigen::Matrix2d p = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d pinv = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d w1 = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d w2 = Eigen::Matrix2d::Zero();
    for (Eigen::Index k = 0; k < ns; ++k) {
        const Eigen::Matrix2d r = rotation(theta[static_cast<std::size_t>(k)]);
        const Eigen::Vector2d u = r * a;
        cfirst(k) = s * u(1);
        const Eigen::Matrix2d rp = r * p;
        rrow.row(k) = rp.row(1);
        a = kmat * u;
        p = kmat * rp;
        pinv = pinv * r.transpose() * kinv;

        const Eigen::Vector2d v = pinv.col(0);
        const Eigen::RowVector2d rk = rrow.row(k);
        const double second = s * s * (rk * w1 * rk.transpose())(0);
        w2.noalias() += second * v * v.transpose();
        res.lead.row(k) = cfirst(k) * v.transpose();
        w1.noalias() += cfirst(k) * cfirst(k) * v * v.transpose();

        const Eigen::RowVector2d ep = p.row(1);
        res.excited_population(k) = a(1) * a(1) + (ep * (w1 + w2) * ep.transpose())(0);
    }
    res.vacuum = a(0);

    // Backward pass: q(n) = <g| M_{end} ... M_{n+1} |g>.
    Eigen::VectorXd q(ns);
    Eigen::RowVector2d rho(1.0, 0.0);
    q(ns - 1) = 1.0;
    for (Eigen::Index n = ns - 2; n >= 0; --n) {
        rho = rho * (kmat * rotation(theta[static_cast<std::size_t>(n + 1)]));
        q(n) = rho(0);
    }
    for (Eigen::Index n = 0; n < ns; ++n) {
        res.one_photon(n) = cfirst(n) * q(n);
        res.trail.row(n) = (s * q(n)) * rrow.row(n);
    }

    res.p0 = res.vacuum * res.vacuum;
    res.p1 = res.one_photon.squaredNorm();
    res.p2 = res.two_photon_probability(0, steps, 0, steps);
    res.excited_residual = res.excited_population(ns - 1);
    res.three_photon = std::max(0.0, 1.0 - res.p0 - res.p1 - res.p2 - res.excited_residual);
    return res;
}

}  // namespace pne
