#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "pne/core/types.hpp"
#include "pne/dynamics/field_state.hpp"

namespace pne {

enum class InitialAtom { Ground, Excited };

/// Discretised atom-field collision model truncated at two emitted photons.
///
/// Each step of length dt applies the square-pulse drive rotation (when the step midpoint
/// lies inside a pulse) followed by an exact amplitude-damping collision that moves the
/// excited amplitude into the step's field slot with probability 1 - e^{-gamma dt}. A zero
/// width pulse is a single pi rotation at the start of the step containing its start time.
///
/// Amplitudes refer to orthonormal step modes. The two-photon amplitude for emissions in
/// steps n < m is separable with rank two: A2(n, m) = lead.row(n).dot(trail.row(m)).
struct CollisionResult {
    double delta_t = 0.0;
    std::size_t n_steps = 0;

    double vacuum = 0.0;          ///< final amplitude of |g>|0>
    Eigen::VectorXd one_photon;   ///< A1(n): atom back in |g>
    Eigen::MatrixX2d lead;        ///< first-emission factors, n_steps x 2
    Eigen::MatrixX2d trail;       ///< second-emission factors, n_steps x 2

    /// Excited population after each step, summed over the 0, 1 and 2 photon branches.
    Eigen::VectorXd excited_population;

    double p0 = 0.0, p1 = 0.0, p2 = 0.0;
    double excited_residual = 0.0;  ///< atom still excited at the end of the run
    double three_photon = 0.0;      ///< norm carried away by third emissions

    double time_of_step(std::size_t n) const { return (static_cast<double>(n) + 0.5) * delta_t; }
    double two_photon_amplitude(std::size_t n, std::size_t m) const;

    /// Dense A2 with zeros on and below the diagonal. Limited to 8000 steps.
    Eigen::MatrixXd two_photon_dense() const;

    /// One-photon probability over steps [begin, end).
    double one_photon_probability(std::size_t begin, std::size_t end) const;
    /// Probability of a first emission in [a0, a1) and a second one in [b0, b1).
    double two_photon_probability(std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) const;

    /// One-photon amplitude density A1 / sqrt(dt) on the step midpoints.
    Eigen::VectorXd one_photon_density() const { return one_photon / std::sqrt(delta_t); }

    /// Projects onto the cells of `grid`, whose start must be 0 and whose step must be an
    /// integer multiple of dt. Cells past the simulated span are zero.
    FieldState to_field_state(const TimeGrid& grid) const;
};

/// `t_end` <= 0 selects the last pulse end plus 12 T1. Throws ValidationError when
/// dt * max(gamma, Omega) >= 0.05 or when two zero-width pulses share a step.
CollisionResult collision_evolve(const AtomParams& atom, const PulseSequence& seq, double delta_t,
                                 InitialAtom initial = InitialAtom::Ground, double t_end = 0.0);

}  // namespace pne
