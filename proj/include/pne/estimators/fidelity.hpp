#pragma once

#include <optional>

namespace pne {

struct FidelityEstimate {
    double value = 0.0;
    double range_min = 0.0, range_max = 0.0;  ///< over the admissible intensity scale
    std::optional<double> bound;              ///< p1 sqrt(M_s) for the one-photon case
};

/// One pi pulse, time-bin split at T. mu_bar_a = mu_a / mu_pi.
struct PsiPlusInputs {
    double mu_tilde_pi = 1.0;  ///< in [p1, mu_pi]
    double mu_bar_e = 0.5, mu_bar_l = 0.5;
    double M_ee = 1.0, M_ll = 1.0, M_el = 1.0;
    double p1 = 1.0;
    double mu_pi = 1.0;
    std::optional<double> M_s;
};

/// Two pi pulses. mu_bar_a = mu_a / mu.
struct PhiPlusInputs {
    double p0 = 0.5, p2 = 0.5;
    double mu_tilde = 1.0;  ///< in [2 p2, mu]
    double mu_bar_e = 0.5, mu_bar_l = 0.5;
    double M_ee = 1.0, M_ll = 1.0, c2_el = 1.0;
    double mu = 1.0;
};

/// F = (mu~/2) (mu_e sqrt(M_ee) + mu_l sqrt(M_ll) + 2 sqrt(mu_e mu_l M_el)), linear in mu~.
FidelityEstimate fidelity_psi_plus(const PsiPlusInputs& in);

/// F = (p0 + (mu~^2/p2) mu_e mu_l sqrt(M_ee M_ll) + 2 mu~ sqrt(mu_e mu_l c2_el)) / 2.
/// Throws ValidationError when p2 <= 0.
FidelityEstimate fidelity_phi_plus(const PhiPlusInputs& in);

}  // namespace pne
