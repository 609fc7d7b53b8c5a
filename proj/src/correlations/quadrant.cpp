#include "pne/correlations/quadrant.hpp"

#include <cmath>

#include "pne/core/errors.hpp"

namespace pne {

double QuadrantSummary::weighted_average(const QuadrantSummary& s, const QuadrantValues& q) {
    double total = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            if (q[a][b]) total += s.mu_bar[a] * s.mu_bar[b] * *q[a][b];
        }
    }
    return total;
}

QuadrantSummary quadrant_reduce(const MapSet& maps, double threshold) {
    const TimeGrid& grid = maps.grid;
    if (!(threshold > grid.start && threshold < grid.end())) {
        throw ValidationError("threshold", "T must lie strictly inside the grid");
    }
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    const double h = grid.step;

    // Early weight per cell: 1 below T, 0 above, 1/2 when T falls strictly inside the cell.
    Eigen::VectorXd we(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lo = grid.edge(static_cast<std::size_t>(i));
        const double hi = lo + h;
        const double eps = 1e-9 * h;
        if (hi <= threshold + eps) {
            we(i) = 1.0;
        } else if (lo >= threshold - eps) {
            we(i) = 0.0;
        } else {
            we(i) = 0.5;
        }
    }
    const Eigen::VectorXd wl = Eigen::VectorXd::Ones(n) - we;
    const std::array<const Eigen::VectorXd*, 2> w{&we, &wl};

    QuadrantSummary s;
    s.threshold = threshold;
    s.mu = maps.mu();
    if (!(s.mu > 0.0)) throw NumericalError("source carries no intensity");
    for (int a = 0; a < 2; ++a) {
        s.mu_bin[a] = w[a]->dot(maps.intensity) * h;
        s.mu_bar[a] = s.mu_bin[a] / s.mu;
    }

    auto quad = [&](const Eigen::MatrixXd& v, int a, int b) { return w[a]->dot(v * *w[b]) * h * h; };
    auto fill = [&](const Eigen::MatrixXd& v, QuadrantValues& q) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const double norm = s.mu_bin[a] * s.mu_bin[b];
                if (norm > 1e-14 * s.mu * s.mu) q[a][b] = quad(v, a, b) / norm;
            }
        }
    };

    fill(maps.g2.values, s.g2);
    fill(maps.g1sq.values, s.M);
    fill(maps.c2sq.values, s.c2);
    if (maps.cminus) fill(maps.cminus->values, s.c_minus);

    const double mu2 = s.mu * s.mu;
    s.g2_total = maps.g2.integral() / mu2;
    s.M_total = maps.g1sq.integral() / mu2;
    s.c2_total = maps.c2sq.integral() / mu2;
    s.c1 = maps.c1();
    return s;
}

}  // namespace pne
