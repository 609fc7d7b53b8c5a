#include "pne/dynamics/field_state.hpp"

#include <cmath>
#include <vector>

#include "pne/core/errors.hpp"

namespace pne {

void FieldState::validate(double tol) const {
    grid.validate();
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    if (psi1.size() != n || phi.rows() != n || phi.cols() != n) {
        throw ValidationError("grid", "field arrays do not match the grid size");
    }
    const double scale = std::max(1.0, phi.cwiseAbs().maxCoeff());
    if ((phi - phi.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
        throw ValidationError("phi", "two-photon amplitude must be symmetric");
    }
    if (p0() + p1() + p2() > 1.0 + tol) throw ValidationError("probabilities", "sum exceeds 1");
}

Eigen::VectorXcd exponential_bin_mode(const TimeGrid& grid, double gamma, double t0, double t1) {
    Eigen::VectorXcd f = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.n_points));
    for (std::size_t i = 0; i < grid.n_points; ++i) {
        const double t = grid.center(i);
        if (t >= t0 && t < t1) f(static_cast<Eigen::Index>(i)) = std::exp(-0.5 * gamma * (t - t0));
    }
    const double n2 = f.squaredNorm() * grid.step;
    if (!(n2 > 0.0)) throw NumericalError("time bin contains no grid cell");
    return f / std::sqrt(n2);
}

FieldState ideal_field_state(const PhotonicState& state, const AtomParams& atom,
                             const PulseSequence& seq, const TimeGrid& grid) {
    atom.validate();
    seq.validate();
    grid.validate();
    if (state.n_bins() != static_cast<std::size_t>(seq.n_pulses)) {
        throw ValidationError("n_bins", "state and sequence disagree on the number of bins");
    }
    const std::vector<double> starts = seq.pulse_starts();
    std::vector<Eigen::VectorXcd> modes;
    for (std::size_t j = 0; j < starts.size(); ++j) {
        const double end = j + 1 < starts.size() ? starts[j + 1] : grid.end() + grid.step;
        modes.push_back(exponential_bin_mode(grid, atom.gamma, starts[j], end));
    }

    const auto n = static_cast<Eigen::Index>(grid.n_points);
    FieldState fs;
    fs.grid = grid;
    fs.psi1 = Eigen::VectorXcd::Zero(n);
    fs.phi = Eigen::MatrixXcd::Zero(n, n);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (const auto& [bits, amp] : state.amplitudes()) {
        std::vector<std::size_t> ones;
        for (std::size_t j = 0; j < bits.size(); ++j) {
            if (bits[j] == '1') ones.push_back(j);
        }
        if (ones.empty()) {
            fs.c0 += amp;
        } else if (ones.size() == 1) {
            fs.psi1 += amp * modes[ones[0]];
        } else if (ones.size() == 2) {
            const auto& a = modes[ones[0]];
            const auto& b = modes[ones[1]];
            fs.phi.noalias() += (amp * inv_sqrt2) * (a * b.transpose() + b * a.transpose());
        }
    }
    fs.deficit = std::max(0.0, 1.0 - fs.p0() - fs.p1() - fs.p2());
    return fs;
}

}  // namespace pne
