#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace pne {

/// g2_HOM(phi) = (1 - M + g2 - c2 cos(2 phi) + 2 c_minus cos(phi)) / 2.
double hom_g2(double phi, double M, double g2, double c2, double c_minus = 0.0);

struct SelfHomodyne {
    double i_sh = 0.0;          ///< c1 cos(phi)
    double mu_plus = 0.0;       ///< mu (1 + I_SH)
    double mu_minus = 0.0;      ///< mu (1 - I_SH)
    double normalization = 1.0; ///< mu+ mu- / mu^2 = 1 - I_SH^2
};

SelfHomodyne self_homodyne(double c1, double phi, double mu = 1.0);

/// Phase-averaged normalisation bias of the uncorrelated coincidences, c1^2 / 2.
double phase_averaged_bias(double c1);

struct PhaseFit {
    double offset = 0.0;         ///< a in g2_HOM = a - b I^2
    double curvature = 0.0;      ///< b
    double c2 = 0.0;             ///< b c1^2
    double M = 0.0;              ///< 1 + g2 + c2 - 2a (needs g2)
    double residual_se = 0.0;    ///< standard error of the regression
    double offset_se = 0.0, curvature_se = 0.0, c2_se = 0.0;
    std::size_t n_points = 0;
};

/// Least-squares fit of g2_HOM = a - b I_SH^2 over (I_SH, g2_HOM) points. The amplitude
/// c2 = b c1^2 follows from cos(2 phi) = 2 I^2 / c1^2 - 1; M uses the supplied g2.
/// Throws NumericalError when fewer than two distinct I_SH^2 values are present.
PhaseFit fit_phase_quadratic(const std::vector<std::pair<double, double>>& points, double c1, double g2 = 0.0);

struct HomOverlap {
    double M = 0.0;
    std::optional<double> M_s;  ///< M / (1 - g2), empty when g2 >= 1
};

HomOverlap overlap_from_hom(double g2_hom_phase_averaged, double g2);

}  // namespace pne
