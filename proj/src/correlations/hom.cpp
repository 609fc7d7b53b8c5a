#include "pne/correlations/hom.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "pne/core/errors.hpp"

namespace pne {

double hom_g2(double phi, double M, double g2, double c2, double c_minus) {
    return 0.5 * (1.0 - M + g2 - c2 * std::cos(2.0 * phi) + 2.0 * c_minus * std::cos(phi));
}

SelfHomodyne self_homodyne(double c1, double phi, double mu) {
    if (!(c1 >= 0.0 && c1 <= 1.0)) throw ValidationError("c1", "must lie in [0, 1]");
    SelfHomodyne s;
    s.i_sh = c1 * std::cos(phi);
    s.mu_plus = mu * (1.0 + s.i_sh);
    s.mu_minus = mu * (1.0 - s.i_sh);
    s.normalization = 1.0 - s.i_sh * s.i_sh;
    return s;
}

double phase_averaged_bias(double c1) { return 0.5 * c1 * c1; }

PhaseFit fit_phase_quadratic(const std::vector<std::pair<double, double>>& points, double c1, double g2) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    double xmin = INFINITY, xmax = -INFINITY;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double i2 = points[static_cast<std::size_t>(i)].first * points[static_cast<std::size_t>(i)].first;
        x(i, 0) = 1.0;
        x(i, 1) = -i2;
        y(i) = points[static_cast<std::size_t>(i)].second;
        xmin = std::min(xmin, i2);
        xmax = std::max(xmax, i2);
    }
    if (n < 2 || !(xmax - xmin > 1e-14 * std::max(1.0, xmax))) {
        throw NumericalError("phase fit needs at least two distinct I_SH^2 values");
    }
    const Eigen::Matrix2d xtx = x.transpose() * x;
    const Eigen::Vector2d beta = xtx.ldlt().solve(x.transpose() * y);

    PhaseFit f;
    f.n_points = static_cast<std::size_t>(n);
    f.offset = beta(0);
    f.curvature = beta(1);
    f.c2 = f.curvature * c1 * c1;
    f.M = 1.0 + g2 + f.c2 - 2.0 * f.offset;
    const double rss = (y - x * beta).squaredNorm();
    if (n > 2) {
        const double s2 = rss / static_cast<double>(n - 2);
        const Eigen::Matrix2d cov = s2 * xtx.inverse();
        f.residual_se = std::sqrt(s2);
        f.offset_se = std::sqrt(cov(0, 0));
        f.curvature_se = std::sqrt(cov(1, 1));
        f.c2_se = f.curvature_se * c1 * c1;
    }
    return f;
}

HomOverlap overlap_from_hom(double g2_hom_phase_averaged, double g2) {
    if (!(g2_hom_phase_averaged >= 0.0) || !(g2 >= 0.0)) throw ValidationError("g2", "inputs must be >= 0");
    HomOverlap o;
    o.M = 1.0 - 2.0 * g2_hom_phase_averaged + g2;
    if (g2 < 1.0) o.M_s = o.M / (1.0 - g2);
    return o;
}

}  // namespace pne
