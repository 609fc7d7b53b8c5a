#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pne/core/photonic_state.hpp"
#include "pne/core/types.hpp"

namespace pne {

/// Amplitude-damping isometry for the gap Delta t_m before pulse m (counted from the end).
struct Isometry {
    int m = 0;
    double alpha = 0.0;  ///< e^{-gamma dt/2}, amplitude that the atom is still excited
    double beta = 1.0;   ///< sqrt(1 - alpha^2)

    static Isometry make(int m, double gamma, double dt);
};

/// Pulse separations equalising every amplitude of the ideal N-pulse state.
struct GoldenSchedule {
    int n_pulses = 0;
    double t1 = 0.0;
    std::vector<double> separations;  ///< chronological; separations[j] = Delta t_{N-j}
    std::vector<std::uint64_t> fib;   ///< F_0..F_N with F_0 = F_1 = 1

    /// Delta t_m for m = 2..N.
    double delta_t(int m) const;
    PulseSequence sequence() const;
};

/// Ideal short-pulse state <g|V_[1]...V_[N]|g>, chronological bitstrings, real positive
/// amplitudes. N = 0 yields the vacuum on zero bins.
PhotonicState build_state(const AtomParams& atom, const PulseSequence& seq);

/// F_N with F_0 = F_1 = 1. Throws ValidationError for N < 0 or when F_N overflows 64 bits.
std::uint64_t count_terms(int n);

GoldenSchedule golden_schedule(int n, double t1);

/// T_[m] = T1 ln(N/(N-m)), m = 1..N-1.
TimeBinPartition w_state_thresholds(int n, double t1);

/// Schmidt coefficients across the cut between bins [0, cut) and [cut, n_bins), descending.
/// Coefficients below 1e-14 of the largest are dropped.
Eigen::VectorXd bipartition_amplitudes(const PhotonicState& state, std::size_t cut);

/// {"n_bins": N, "terms": [{"bits": "...", "re": x, "im": y}, ...]}
std::string state_to_json(const PhotonicState& state);
PhotonicState state_from_json(const std::string& text);

}  // namespace pne
