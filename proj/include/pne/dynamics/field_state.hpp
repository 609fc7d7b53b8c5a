#pragma once

#include <Eigen/Dense>

#include "pne/core/photonic_state.hpp"
#include "pne/core/types.hpp"

namespace pne {

/// Pure field state truncated at two photons, sampled on the cells of `grid`:
///   |psi> = c0|0> + int psi1(t) a+(t)|0> dt + (1/sqrt 2) int int phi(t1,t2) a+(t1) a+(t2)|0>
/// with phi symmetric. Discrete norms: p1 = sum |psi1|^2 h, p2 = sum |phi|^2 h^2.
/// `deficit` is the probability outside the truncation (three or more photons, leftovers).
struct FieldState {
    TimeGrid grid;
    cplx c0{0.0, 0.0};
    Eigen::VectorXcd psi1;
    Eigen::MatrixXcd phi;
    double deficit = 0.0;

    double p0() const { return std::norm(c0); }
    double p1() const { return psi1.squaredNorm() * grid.step; }
    double p2() const { return phi.squaredNorm() * grid.step * grid.step; }
    /// mu = p1 + 2 p2 within the truncation.
    double mean_photon_number() const { return p1() + 2.0 * p2(); }

    /// Sizes agree with the grid, phi symmetric within `tol`, probabilities sum below 1 + tol.
    void validate(double tol = 1e-9) const;
};

/// Exponential time-bin mode starting at `t0` and truncated at `t1`, normalised on the grid
/// cells whose centres fall in [t0, t1).
Eigen::VectorXcd exponential_bin_mode(const TimeGrid& grid, double gamma, double t0, double t1);

/// Continuous-time field of an ideal (t_p = 0) photonic state. Bin j spans from pulse j to
/// pulse j+1 (the last bin is open-ended) and holds an exponential mode. Terms with three or
/// more photons go into the deficit.
FieldState ideal_field_state(const PhotonicState& state, const AtomParams& atom,
                             const PulseSequence& seq, const TimeGrid& grid);

}  // namespace pne
