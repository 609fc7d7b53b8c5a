#pragma once

#include <array>
#include <optional>

#include "pne/correlations/maps.hpp"

namespace pne {

/// Index 0 is the early bin (t < T), index 1 the late bin.
using QuadrantValues = std::array<std::array<std::optional<double>, 2>, 2>;

/// Quadrant-normalised quantities. A quadrant whose bins carry no intensity is left empty
/// (undefined) rather than reported as zero.
struct QuadrantSummary {
    double threshold = 0.0;
    double mu = 0.0;
    std::array<double, 2> mu_bin{0.0, 0.0};      ///< mu_e, mu_l
    std::array<double, 2> mu_bar{0.0, 0.0};      ///< mu_a / mu
    QuadrantValues g2, M, c2, c_minus;
    double g2_total = 0.0, M_total = 0.0, c2_total = 0.0, c1 = 0.0;

    /// sum_ab mu_bar_a mu_bar_b q_ab over defined quadrants.
    static double weighted_average(const QuadrantSummary& s, const QuadrantValues& q);
};

/// Integrates every map over the four quadrants split at T. Cells straddling T count half.
QuadrantSummary quadrant_reduce(const MapSet& maps, double threshold);

}  // namespace pne
