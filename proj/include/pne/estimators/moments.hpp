#pragma once

#include <array>

namespace pne {

/// Loss-normalised photon statistics. mu = mu_ratio * mu_pi is the source-level mean.
struct MomentSet {
    double mu_ratio = 1.0;  ///< mu / mu_pi
    double g2 = 0.0;
    double g3 = 0.0;
    double mu_pi = 1.0;
    double sigma_mu_ratio = 0.0, sigma_g2 = 0.0, sigma_g3 = 0.0, sigma_mu_pi = 0.0;

    double mu() const { return mu_ratio * mu_pi; }
    void validate() const;
};

struct NumberProbabilities {
    std::array<double, 4> p{0.0, 0.0, 0.0, 0.0};      ///< p0..p3
    std::array<double, 4> sigma{0.0, 0.0, 0.0, 0.0};  ///< first-order propagated
    double mu = 0.0;
};

/// Truncates the photon-number distribution at three photons and inverts
///   g3 mu^3 = 6 p3,  g2 mu^2 = 2 p2 + 6 p3,  mu = p1 + 2 p2 + 3 p3.
/// Throws UnphysicalError naming p_n when p_n < -3 sigma_n.
NumberProbabilities probabilities_from_moments(const MomentSet& m);

/// Forward map used for round trips: mu = p1 + 2p2 + 3p3, g2 = (2p2 + 6p3)/mu^2, g3 = 6p3/mu^3.
/// mu_pi is left at 1 so that mu_ratio carries mu.
MomentSet moments_from_probabilities(const std::array<double, 4>& p);

}  // namespace pne
