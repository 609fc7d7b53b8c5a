#include "pne/dynamics/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pne/core/errors.hpp"

namespace pne {

namespace {

double resolve_rabi(double rabi, double tp) { return rabi > 0.0 ? rabi : M_PI / tp; }

Eigen::VectorXcd unit_on_grid(Eigen::VectorXcd v, double h) {
    const double n2 = v.squaredNorm() * h;
    if (n2 > 0.0) v /= std::sqrt(n2);
    return v;
}

std::size_t step_index(double t, double dt) { return static_cast<std::size_t>(std::llround(t / dt)); }

double choose_oracle_step(const TimeGrid& grid, double requested) {
    if (requested > 0.0) return requested;
    return grid.step / std::ceil(grid.step / 0.01 - 1e-9);
}

}  // namespace

cplx TemporalWavefunctions::f2(std::size_t i, std::size_t j) const {
    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
    if (i < j) return f2_scale * f1_noise(a) * f1(b);
    if (i == j) return f2_scale * f1_noise(a) * f1(a) / std::sqrt(2.0);
    return cplx{};
}

Eigen::MatrixXcd TemporalWavefunctions::f2_dense() const {
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    Eigen::MatrixXcd m = (f2_scale * f1_noise) * f1.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        m.row(i).head(i).setZero();
        m(i, i) /= std::sqrt(2.0);
    }
    return m;
}

FieldState TemporalWavefunctions::field_state() const {
    FieldState fs;
    fs.grid = grid;
    fs.c0 = std::sqrt(std::max(p0, 0.0));
    fs.psi1 = std::sqrt(p1) * f1;
    const Eigen::MatrixXcd f = f2_dense();
    fs.phi = std::sqrt(0.5 * p2) * (f + f.transpose());
    fs.phi.diagonal() = std::sqrt(p2) * f.diagonal();
    fs.deficit = std::max(0.0, 1.0 - fs.p0() - fs.p1() - fs.p2());
    return fs;
}

TemporalWavefunctions single_pulse(const AtomParams& atom, double rabi, double tp, const TimeGrid& grid) {
    atom.validate();
    grid.validate();
    if (!(tp > 0.0)) throw ValidationError("tp", "single_pulse needs tp > 0");
    const double omega = resolve_rabi(rabi, tp);
    const double g = atom.gamma;

    TemporalWavefunctions w;
    w.grid = grid;
    if (std::abs(omega * tp - M_PI) > 1e-6 * M_PI) w.warnings.push_back("pulse area differs from pi");
    if (tp * g >= 1.0) w.warnings.push_back("tp is not short compared with 1/gamma");

    std::size_t in_pulse = 0;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const double t = grid.center(i);
        if (t >= 0.0 && t < tp) ++in_pulse;
    }
    if (in_pulse < 8) throw NumericalError("grid too coarse: fewer than 8 cells across the pulse");

    const double sq = std::sqrt(g);
    const double stp = std::sin(0.5 * omega * tp);
    auto u1 = [&](double t) {
        if (t < 0.0) return 0.0;
        if (t < tp) return sq * std::sin(0.5 * omega * t) * std::cos(0.5 * omega * (tp - t)) * std::exp(-0.25 * g * tp);
        return sq * stp * std::exp(-0.25 * g * (2.0 * t - tp));
    };
    auto noise = [&](double t) {
        if (t < 0.0 || t >= tp) return 0.0;
        return std::sin(0.5 * omega * t) * std::sin(0.5 * omega * (tp - t)) / stp;
    };

    // Probabilities from the continuous expressions, independent of the grid.
    const int fine = 20000;
    const double hf = tp / fine;
    double in1 = 0.0, in_n = 0.0;
    for (int k = 0; k < fine; ++k) {
        const double t = (k + 0.5) * hf;
        in1 += u1(t) * u1(t) * hf;
        in_n += noise(t) * noise(t) * hf;
    }
    w.p1 = in1 + stp * stp * std::exp(-0.5 * g * tp);
    w.p2 = w.p1 * g * in_n;
    w.p0 = 1.0 - w.p1 - w.p2;
    if (w.p0 < 0.0) {
        w.warnings.push_back("closed-form probabilities exceed one; p0 clamped");
        w.p0 = 0.0;
    }

    const auto n = static_cast<Eigen::Index>(grid.n_points);
    Eigen::VectorXcd f1(n), fn(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = grid.center(static_cast<std::size_t>(i));
        f1(i) = u1(t);
        fn(i) = noise(t);
    }
    const double h = grid.step;
    w.f1 = unit_on_grid(f1, h);
    w.f1_noise = unit_on_grid(fn, h);
    w.noise_overlap = w.f1_noise.dot(w.f1) * h;

    // Ordered-product norm: sum_{i<j} |n_i|^2 |f_j|^2 + (1/2) sum_i |n_i f_i|^2, times h^2.
    double tail = 0.0, s = 0.0;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        const double ni = std::norm(w.f1_noise(i)), fi = std::norm(w.f1(i));
        s += ni * tail + 0.5 * ni * fi;
        tail += fi;
    }
    s *= h * h;
    if (!(s > 0.0)) throw NumericalError("two-photon amplitude vanishes on the grid");
    w.f2_scale = 1.0 / std::sqrt(s);
    return w;
}

BinProbabilities two_pulse_closed_form(double gamma, double tp, double dt) {
    const double gt = gamma * tp;
    const double edt = std::exp(-gamma * dt), etp = std::exp(-gt);
    BinProbabilities b;
    b.p0 = edt;
    b.p01 = 0.0;
    b.p10 = 0.25 * gt * edt;
    b.p20 = 0.375 * gt * (etp - edt);
    b.p11 = (0.375 * gt + 1.0) * etp + (0.375 * gt - 1.0) * edt;
    return b;
}

TwoPulseDecomposition two_pulse(const AtomParams& atom, double rabi, double tp, double dt,
                                const TimeGrid& grid, double oracle_step) {
    atom.validate();
    grid.validate();
    if (!(tp >= 0.0)) throw ValidationError("tp", "must be >= 0");
    if (!(dt > tp)) throw ValidationError("dt", "pulse separation must exceed the pulse width");

    PulseSequence seq;
    seq.n_pulses = 2;
    seq.separations = {dt};
    seq.pulse_width = tp;
    seq.rabi = tp > 0.0 ? resolve_rabi(rabi, tp) : 0.0;

    TwoPulseDecomposition d;
    d.tp = tp;
    d.dt = dt;
    d.threshold = dt + tp;
    d.grid = grid;
    d.closed_form = two_pulse_closed_form(atom.gamma, tp, dt);

    const double step = choose_oracle_step(grid, oracle_step);
    const double t_end = std::max(grid.end(), dt + tp + 12.0 / atom.gamma);
    const CollisionResult r = collision_evolve(atom, seq, step, InitialAtom::Ground, t_end);

    const std::size_t e[5] = {0, step_index(tp, step), step_index(dt, step), step_index(dt + tp, step),
                              r.n_steps};
    auto key = [](int i, int j) {
        std::string k = "0000";
        k[static_cast<std::size_t>(i)] += 1;
        if (j >= 0) k[static_cast<std::size_t>(j)] += 1;
        return k;
    };
    for (int i = 0; i < 4; ++i) {
        d.intervals[key(i, -1)] = r.one_photon_probability(e[i], e[i + 1]);
        for (int j = i; j < 4; ++j) d.intervals[key(i, j)] = r.two_photon_probability(e[i], e[i + 1], e[j], e[j + 1]);
    }
    d.intervals["0000"] = r.p0;

    auto& s = d.simulated;
    s.p0 = r.p0;
    s.p10 = d.intervals["1000"] + d.intervals["0100"] + d.intervals["0010"];
    s.p01 = d.intervals["0001"];
    s.p20 = d.intervals["2000"] + d.intervals["0200"] + d.intervals["0020"] + d.intervals["1100"] +
            d.intervals["1010"] + d.intervals["0110"];
    s.p11 = d.intervals["1001"] + d.intervals["0101"] + d.intervals["0011"];

    d.field = r.to_field_state(grid);

    // Components split at the threshold.
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    Eigen::Index n_early = 0;
    while (n_early < n && grid.center(static_cast<std::size_t>(n_early)) < d.threshold) ++n_early;
    const double h = grid.step;
    Eigen::VectorXcd early = Eigen::VectorXcd::Zero(n), late = Eigen::VectorXcd::Zero(n);
    early.head(n_early) = d.field.psi1.head(n_early);
    late.tail(n - n_early) = d.field.psi1.tail(n - n_early);
    d.f10 = unit_on_grid(early, h);
    d.f01 = unit_on_grid(late, h);
    d.f20 = Eigen::MatrixXcd::Zero(n, n);
    d.f20.topLeftCorner(n_early, n_early) = d.field.phi.topLeftCorner(n_early, n_early);
    const double n20 = d.f20.squaredNorm() * h * h;
    if (n20 > 0.0) d.f20 /= std::sqrt(n20);

    d.f_e = Eigen::VectorXcd::Zero(n);
    d.f_l = Eigen::VectorXcd::Zero(n);
    if (n_early > 0 && n_early < n) {
        const Eigen::MatrixXcd block = d.field.phi.topRightCorner(n_early, n - n_early);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(block, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd sv = svd.singularValues();
        if (sv.size() > 0 && sv(0) > 0.0) {
            d.f_e.head(n_early) = svd.matrixU().col(0);
            d.f_l.tail(n - n_early) = svd.matrixV().col(0).conjugate();
            // Fix the global phase so that the late mode starts real and positive.
            Eigen::Index k = n_early;
            while (k < n && std::abs(d.f_l(k)) == 0.0) ++k;
            if (k < n) {
                const cplx ph = std::abs(d.f_l(k)) / d.f_l(k);
                d.f_l *= ph;
                d.f_e /= ph;
            }
            d.f_e = unit_on_grid(d.f_e, h);
            d.f_l = unit_on_grid(d.f_l, h);
            d.separability = sv.size() > 1 ? sv(1) / sv(0) : 0.0;
        }
    }
    return d;
}

FieldState simulate_field(const AtomParams& atom, const PulseSequence& seq, const TimeGrid& grid,
                          double oracle_step) {
    const double step = choose_oracle_step(grid, oracle_step);
    const double last = seq.pulse_starts().empty() ? 0.0 : seq.pulse_starts().back() + seq.pulse_width;
    const double t_end = std::max(grid.end(), last + 12.0 / atom.gamma);
    return collision_evolve(atom, seq, step, InitialAtom::Ground, t_end).to_field_state(grid);
}

double overlap_fraction(double gamma, double tp, double jitter_fwhm) {
    if (!(gamma > 0.0)) throw ValidationError("gamma", "must be > 0");
    if (!(tp >= 0.0) || !(jitter_fwhm >= 0.0)) throw ValidationError("tp", "widths must be >= 0");
    return 0.375 * gamma * std::hypot(tp, jitter_fwhm);
}

void write_wavefunction_csv(std::ostream& os, const TimeGrid& grid, const Eigen::VectorXcd& f1) {
    if (f1.size() != static_cast<Eigen::Index>(grid.n_points)) {
        throw ValidationError("f1", "size does not match the grid");
    }
    const auto old = os.precision(17);
    os << "t,re_f1,im_f1,abs2_f1\n";
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const cplx v = f1(static_cast<Eigen::Index>(i));
        os << grid.center(i) << ',' << v.real() << ',' << v.imag() << ',' << std::norm(v) << '\n';
    }
    os.precision(old);
}

}  // namespace pne
