#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pne/estimators/fidelity.hpp"
#include "pne/estimators/moments.hpp"

namespace pne {

/// Two time-bin qubits: basis index 2*n_e + n_l, i.e. {00, 01, 10, 11} = {0, 1, 2, 3}.
inline constexpr int dm_index(int n_early, int n_late) { return 2 * n_early + n_late; }

enum class ElementStatus { Measured, Bounded, Free };

/// Measured: value +- sigma. Bounded (diagonal only): uniform in [0, upper].
/// Free (off-diagonal only): magnitude uniform in [0, sqrt(rho_ii rho_jj)], any phase.
struct DmElement {
    ElementStatus status = ElementStatus::Free;
    double value = 0.0;
    double sigma = 0.0;
    double upper = 0.0;
};

/// Only the upper triangle (i <= j) is stored; the lower triangle mirrors it. Measured
/// off-diagonals are non-negative reals by the phase convention of the time-bin modes.
class PartialDensityMatrix {
public:
    PartialDensityMatrix();

    DmElement& at(int i, int j);
    const DmElement& at(int i, int j) const;

    /// Largest admissible diagonal (measured value or bound), used for Cauchy-Schwarz caps.
    double diagonal_ceiling(int i) const;
    /// Measured and bounded-at-ceiling diagonals, measured off-diagonals, free elements at zero.
    Eigen::Matrix4cd central() const;

    std::vector<std::string> warnings;

private:
    std::array<DmElement, 10> upper_;
};

struct PsiPlusSigmas {
    double mu_tilde_pi = 0.0, mu_bar = 0.0, M_ee = 0.0, M_ll = 0.0, M_el = 0.0;
};

struct PhiPlusSigmas {
    double p0 = 0.0, p2 = 0.0, mu_tilde = 0.0, mu_bar = 0.0, M_ee = 0.0, M_ll = 0.0, c2_el = 0.0;
};

/// One-photon case: rho_0101, rho_1010, rho_0110 measured; rho_0000 <= p0 and rho_1111 <= p2.
/// Sigmas are propagated to first order (mu_bar_l = 1 - mu_bar_e moves with mu_bar_e).
PartialDensityMatrix build_partial_dm(const PsiPlusInputs& in, const PsiPlusSigmas& sigma,
                                      const NumberProbabilities& probs);

/// Two-photon case: rho_0000, rho_1111, rho_0011 measured; rho_0101, rho_1010 <= p1.
PartialDensityMatrix build_partial_dm(const PhiPlusInputs& in, const PhiPlusSigmas& sigma,
                                      const NumberProbabilities& probs);

}  // namespace pne
