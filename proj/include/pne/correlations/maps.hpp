#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "pne/core/types.hpp"
#include "pne/dynamics/dynamics.hpp"
#include "pne/dynamics/field_state.hpp"

namespace pne {

enum class MapKind { IntensityProduct, G2, AbsG1Sq, AbsC2Sq, CMinus };

std::string to_string(MapKind kind);

/// Two-time map on grid x grid cells; values(i, j) belongs to (t1, t2) = (center(i), center(j)).
struct CorrelationMap {
    TimeGrid grid;
    MapKind kind = MapKind::G2;
    Eigen::MatrixXd values;

    /// Cell-sum integral, sum values * h^2.
    double integral() const { return values.sum() * grid.step * grid.step; }
    /// Swap symmetry (antisymmetry for CMinus) and sign checks.
    void validate(double tol = 1e-12) const;
};

/// Correlation maps of one source. `intensity` is N(t) and `coherent` is <a(t)>.
struct MapSet {
    TimeGrid grid;
    Eigen::VectorXd intensity;
    Eigen::VectorXcd coherent;
    CorrelationMap nn, g2, g1sq, c2sq;
    std::optional<CorrelationMap> cminus;

    double mu() const { return intensity.sum() * grid.step; }
    /// c1 = mu^-1 int |<a(t)>|^2 dt.
    double c1() const;
};

/// Builds N(t1)N(t2), G2, |G1|^2 and |C2|^2 from a truncated field. Pure dephasing enters as
/// exp(-gamma_star |t1 - t2|) on G1 and on C2. C- is built only when requested.
MapSet build_maps(const FieldState& field, double gamma_star, bool with_cminus = false);
MapSet build_maps(const TemporalWavefunctions& source, double gamma_star, bool with_cminus = false);
MapSet build_maps(const TwoPulseDecomposition& source, double gamma_star, bool with_cminus = false);

/// Column-normalised Gaussian blur matrix: entry (i, j) is the weight of source cell j landing
/// in target cell i, integrated over the target cell and truncated at +-4 sigma.
Eigen::MatrixXd jitter_kernel(const TimeGrid& grid, double fwhm);

/// Separable Gaussian convolution along both axes; fwhm = 0 returns the input unchanged.
CorrelationMap apply_jitter(const CorrelationMap& map, double fwhm);
Eigen::VectorXd apply_jitter(const TimeGrid& grid, const Eigen::VectorXd& signal, double fwhm);
/// Convolves every map and the intensity. The coherent amplitude is left untouched.
MapSet apply_jitter(const MapSet& maps, double fwhm);

/// 2 G_HOM(t1, t2, phi) = NN - |G1|^2 + G2 - |C2|^2 cos(2 phi) + 2 C- cos(phi), returned halved.
CorrelationMap hom_map(const MapSet& maps, double phi);

/// Row stride `stride` in both directions; columns t1, t2, value.
void write_map_csv(std::ostream& os, const CorrelationMap& map, std::size_t stride = 1);

/// Little-endian layout: u64 n_rows, u64 n_cols, f64 step, f64 start, then n_rows*n_cols f64
/// values in row-major order. The kind is not stored.
void write_map_binary(std::ostream& os, const CorrelationMap& map);
CorrelationMap read_map_binary(std::istream& is, MapKind kind = MapKind::G2);

}  // namespace pne
