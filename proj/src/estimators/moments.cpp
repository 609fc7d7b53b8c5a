#include "pne/estimators/moments.hpp"

#include <cmath>
#include <string>

#include "pne/core/errors.hpp"

namespace pne {

void MomentSet::validate() const {
    const double v[] = {mu_ratio, g2, g3, mu_pi, sigma_mu_ratio, sigma_g2, sigma_g3, sigma_mu_pi};
    const char* names[] = {"mu_ratio", "g2", "g3", "mu_pi", "sigma_mu_ratio", "sigma_g2", "sigma_g3", "sigma_mu_pi"};
    for (int i = 0; i < 8; ++i) {
        if (!(std::isfinite(v[i]) && v[i] >= 0.0)) throw ValidationError(names[i], "must be finite and >= 0");
    }
    if (!(mu() > 0.0)) throw ValidationError("mu", "mu_ratio * mu_pi must be > 0");
}

NumberProbabilities probabilities_from_moments(const MomentSet& m) {
    m.validate();
    const double mu = m.mu();
    const double mu2 = mu * mu, mu3 = mu2 * mu;
    const double g2 = m.g2, g3 = m.g3;

    NumberProbabilities r;
    r.mu = mu;
    r.p[3] = g3 * mu3 / 6.0;
    r.p[2] = g2 * mu2 / 2.0 - g3 * mu3 / 2.0;
    r.p[1] = mu - g2 * mu2 + g3 * mu3 / 2.0;
    r.p[0] = 1.0 - mu + g2 * mu2 / 2.0 - g3 * mu3 / 6.0;

    // Rows: d p_n / d(mu, g2, g3).
    const double jac[4][3] = {
        {-1.0 + g2 * mu - g3 * mu2 / 2.0, mu2 / 2.0, -mu3 / 6.0},
        {1.0 - 2.0 * g2 * mu + 1.5 * g3 * mu2, -mu2, mu3 / 2.0},
        {g2 * mu - 1.5 * g3 * mu2, mu2 / 2.0, -mu3 / 2.0},
        {g3 * mu2 / 2.0, 0.0, mu3 / 6.0},
    };
    const double var_mu = std::pow(m.mu_pi * m.sigma_mu_ratio, 2) + std::pow(m.mu_ratio * m.sigma_mu_pi, 2);
    for (int n = 0; n < 4; ++n) {
        const double var = jac[n][0] * jac[n][0] * var_mu + std::pow(jac[n][1] * m.sigma_g2, 2) +
                           std::pow(jac[n][2] * m.sigma_g3, 2);
        r.sigma[n] = std::sqrt(var);
    }
    for (int n = 0; n < 4; ++n) {
        if (r.p[n] < -3.0 * r.sigma[n] - 1e-12) {
            throw UnphysicalError("p" + std::to_string(n), "estimate " + std::to_string(r.p[n]) +
                                                               " lies below -3 sigma (" +
                                                               std::to_string(r.sigma[n]) + ")");
        }
    }
    return r;
}

MomentSet moments_from_probabilities(const std::array<double, 4>& p) {
    MomentSet m;
    const double mu = p[1] + 2.0 * p[2] + 3.0 * p[3];
    if (!(mu > 0.0)) throw ValidationError("mu", "probabilities carry no photons");
    m.mu_ratio = mu;
    m.mu_pi = 1.0;
    m.g2 = (2.0 * p[2] + 6.0 * p[3]) / (mu * mu);
    m.g3 = 6.0 * p[3] / (mu * mu * mu);
    return m;
}

}  // namespace pne
