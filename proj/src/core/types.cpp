#include "pne/core/types.hpp"

#include <cmath>
#include <numeric>

#include "pne/core/errors.hpp"

namespace pne {

AtomParams AtomParams::from_lifetime(double t1, double gamma_star) {
    if (!(t1 > 0.0) || !std::isfinite(t1)) {
        throw ValidationError("gamma", "lifetime T1 must be positive and finite");
    }
    AtomParams atom;
    atom.gamma = 1.0 / t1;
    atom.gamma_star = gamma_star;
    atom.validate();
    return atom;
}

double AtomParams::half_life() const { return std::log(2.0) / gamma; }

void AtomParams::validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("gamma", "must be > 0");
    if (!(gamma_star >= 0.0) || !std::isfinite(gamma_star)) {
        throw ValidationError("gamma_star", "must be >= 0");
    }
}

double PulseSequence::separation_from_end(int m) const {
    if (m < 2 || m > n_pulses) {
        throw ValidationError("separations", "index from end must lie in [2, n_pulses]");
    }
    // m = n_pulses is the first chronological separation.
    return separations[static_cast<std::size_t>(n_pulses - m)];
}

std::vector<double> PulseSequence::pulse_starts() const {
    std::vector<double> starts;
    starts.reserve(static_cast<std::size_t>(std::max(n_pulses, 0)));
    double t = 0.0;
    for (int k = 0; k < n_pulses; ++k) {
        starts.push_back(t);
        if (k + 1 < n_pulses) t += separations[static_cast<std::size_t>(k)];
    }
    return starts;
}

double PulseSequence::effective_rabi() const {
    if (rabi > 0.0) return rabi;
    if (pulse_width > 0.0) return M_PI / pulse_width;
    return 0.0;
}

double PulseSequence::total_separation() const {
    return std::accumulate(separations.begin(), separations.end(), 0.0);
}

void PulseSequence::validate() const {
    if (n_pulses < 0) throw ValidationError("n_pulses", "must be >= 0");
    const std::size_t expected = n_pulses > 0 ? static_cast<std::size_t>(n_pulses - 1) : 0;
    if (separations.size() != expected) {
        throw ValidationError("separations", "expected n_pulses - 1 separations");
    }
    for (double dt : separations) {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt", "separations must be > 0");
    }
    if (!(pulse_width >= 0.0) || !std::isfinite(pulse_width)) {
        throw ValidationError("tp", "pulse width must be >= 0");
    }
    if (!(rabi >= 0.0) || !std::isfinite(rabi)) throw ValidationError("rabi", "must be >= 0");
}

Eigen::VectorXd TimeGrid::centers() const {
    Eigen::VectorXd c(static_cast<Eigen::Index>(n_points));
    for (std::size_t i = 0; i < n_points; ++i) c(static_cast<Eigen::Index>(i)) = center(i);
    return c;
}

void TimeGrid::validate() const {
    if (!(step > 0.0) || !std::isfinite(step)) throw ValidationError("grid_step", "must be > 0");
    if (n_points < 2) throw ValidationError("grid", "needs at least 2 points");
}

namespace {

bool commensurate(double value, double step) {
    const double r = value / step;
    return std::abs(r - std::round(r)) < 1e-9 * std::max(1.0, r);
}

}  // namespace

TimeGrid default_grid(const AtomParams& atom, const PulseSequence& seq, double step_hint) {
    atom.validate();
    seq.validate();
    if (!(step_hint > 0.0)) throw ValidationError("grid_step", "must be > 0");

    std::vector<double> edges;
    for (double s : seq.pulse_starts()) {
        if (s > 0.0) edges.push_back(s);
        if (seq.pulse_width > 0.0) edges.push_back(s + seq.pulse_width);
    }

    double step = step_hint;
    if (!edges.empty()) {
        const double base = seq.pulse_width > 0.0 ? seq.pulse_width : edges.front();
        const long k0 = static_cast<long>(std::ceil(base / step_hint - 1e-9));
        for (long k = std::max(1L, k0); k < k0 + 2000; ++k) {
            const double candidate = base / static_cast<double>(k);
            bool ok = true;
            for (double e : edges) ok = ok && commensurate(e, candidate);
            if (ok) {
                step = candidate;
                break;
            }
        }
    }

    const double span = 10.0 / atom.gamma + seq.total_separation() + seq.pulse_width;
    TimeGrid grid;
    grid.start = 0.0;
    grid.step = step;
    grid.n_points = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(span / step - 1e-9)));
    return grid;
}

void TimeBinPartition::validate(const TimeGrid* grid) const {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!std::isfinite(thresholds[i])) throw ValidationError("thresholds", "must be finite");
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
            throw ValidationError("thresholds", "must be strictly increasing");
        }
        if (grid && (thresholds[i] <= grid->start || thresholds[i] >= grid->end())) {
            throw ValidationError("thresholds", "must lie inside the grid span");
        }
    }
}

}  // namespace pne
