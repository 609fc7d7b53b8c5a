#include "pne/correlations/maps.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>

#include <Eigen/SparseCore>

#include "pne/core/errors.hpp"

namespace pne {

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw ParseError("truncated map file", 0);
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

/// D(i, j) = exp(-gamma_star |t_i - t_j|).
Eigen::MatrixXd dephasing_kernel(const TimeGrid& grid, double gamma_star) {
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    Eigen::VectorXd decay(n);
    for (Eigen::Index k = 0; k < n; ++k) decay(k) = std::exp(-gamma_star * grid.step * static_cast<double>(k));
    Eigen::MatrixXd d(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) d(i, j) = decay(std::abs(i - j));
    }
    return d;
}

CorrelationMap make_map(const TimeGrid& grid, MapKind kind, Eigen::MatrixXd values) {
    CorrelationMap m;
    m.grid = grid;
    m.kind = kind;
    m.values = std::move(values);
    return m;
}

}  // namespace

std::string to_string(MapKind kind) {
    switch (kind) {
        case MapKind::IntensityProduct: return "intensity_product";
        case MapKind::G2: return "G2";
        case MapKind::AbsG1Sq: return "absG1sq";
        case MapKind::AbsC2Sq: return "absC2sq";
        case MapKind::CMinus: return "Cminus";
    }
    return "unknown";
}

void CorrelationMap::validate(double tol) const {
    grid.validate();
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    if (values.rows() != n || values.cols() != n) throw ValidationError("values", "map size mismatch");
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    if (kind == MapKind::CMinus) {
        if ((values + values.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
            throw ValidationError("values", "C- map must be antisymmetric");
        }
        return;
    }
    if ((values - values.transpose()).cwiseAbs().maxCoeff() > tol * scale) {
        throw ValidationError("values", to_string(kind) + " map must be symmetric");
    }
    if (values.minCoeff() < -tol * scale) throw ValidationError("values", to_string(kind) + " map must be >= 0");
}

double MapSet::c1() const {
    const double m = mu();
    if (!(m > 0.0)) return 0.0;
    return coherent.squaredNorm() * grid.step / m;
}

MapSet build_maps(const FieldState& field, double gamma_star, bool with_cminus) {
    field.validate(1e-9);
    if (!(gamma_star >= 0.0)) throw ValidationError("gamma_star", "must be >= 0");
    const TimeGrid& grid = field.grid;
    const double h = grid.step;
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    const Eigen::VectorXcd& psi = field.psi1;
    const Eigen::MatrixXcd& phi = field.phi;
    const double r2 = std::sqrt(2.0);

    // G1(t1, t2) = psi(t1) psi*(t2) + 2h (phi phi^H)(t1, t2); lower triangle, then mirrored.
    Eigen::MatrixXcd g1 = Eigen::MatrixXcd::Zero(n, n);
    g1.selfadjointView<Eigen::Lower>().rankUpdate(phi, 2.0 * h);
    g1.selfadjointView<Eigen::Lower>().rankUpdate(psi, 1.0);
    g1.triangularView<Eigen::StrictlyUpper>() = g1.adjoint();

    MapSet out;
    out.grid = grid;
    out.intensity = g1.diagonal().real();
    out.coherent = std::conj(field.c0) * psi + (r2 * h) * (phi * psi.conjugate());

    Eigen::MatrixXd nn = out.intensity * out.intensity.transpose();
    Eigen::MatrixXd g1sq = g1.cwiseAbs2();
    Eigen::MatrixXd g2 = 2.0 * phi.cwiseAbs2();
    Eigen::MatrixXd c2sq = (2.0 * std::norm(field.c0)) * phi.cwiseAbs2();
    if (gamma_star > 0.0) {
        const Eigen::MatrixXd d = dephasing_kernel(grid, gamma_star);
        const Eigen::MatrixXd d2 = d.cwiseAbs2();
        g1sq = g1sq.cwiseProduct(d2);
        c2sq = c2sq.cwiseProduct(d2);
    }
    // Exact symmetry regardless of rounding in the products above.
    g2 = 0.5 * (g2 + g2.transpose()).eval();
    c2sq = 0.5 * (c2sq + c2sq.transpose()).eval();

    out.nn = make_map(grid, MapKind::IntensityProduct, std::move(nn));
    out.g2 = make_map(grid, MapKind::G2, std::move(g2));
    out.g1sq = make_map(grid, MapKind::AbsG1Sq, std::move(g1sq));
    out.c2sq = make_map(grid, MapKind::AbsC2Sq, std::move(c2sq));

    if (with_cminus) {
        // B(t1, t2) = <a+(t2) a+(t1) a(t1)> = sqrt2 psi(t1) phi*(t1, t2).
        const Eigen::MatrixXcd b = (r2 * psi).asDiagonal() * phi.conjugate();
        Eigen::MatrixXd cm(n, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index i = 0; i < n; ++i) {
                cm(i, j) = (out.coherent(j) * b(i, j) - out.coherent(i) * b(j, i)).real();
            }
        }
        cm = 0.5 * (cm - cm.transpose()).eval();
        out.cminus = make_map(grid, MapKind::CMinus, std::move(cm));
    }
    return out;
}

MapSet build_maps(const TemporalWavefunctions& source, double gamma_star, bool with_cminus) {
    return build_maps(source.field_state(), gamma_star, with_cminus);
}

MapSet build_maps(const TwoPulseDecomposition& source, double gamma_star, bool with_cminus) {
    return build_maps(source.field, gamma_star, with_cminus);
}

Eigen::MatrixXd jitter_kernel(const TimeGrid& grid, double fwhm) {
    grid.validate();
    if (!(fwhm >= 0.0)) throw ValidationError("jitter_fwhm", "must be >= 0");
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    if (fwhm == 0.0) return Eigen::MatrixXd::Identity(n, n);
    const double sigma = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const double h = grid.step;
    const auto reach = static_cast<Eigen::Index>(std::ceil(4.0 * sigma / h)) + 1;
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    const double inv = 1.0 / (std::sqrt(2.0) * sigma);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double c = grid.center(static_cast<std::size_t>(j));
        double total = 0.0;
        for (Eigen::Index i = std::max<Eigen::Index>(0, j - reach); i <= std::min(n - 1, j + reach); ++i) {
            double lo = grid.edge(static_cast<std::size_t>(i)) - c;
            double hi = lo + h;
            lo = std::max(lo, -4.0 * sigma);
            hi = std::min(hi, 4.0 * sigma);
            if (hi <= lo) continue;
            const double w = 0.5 * (std::erf(hi * inv) - std::erf(lo * inv));
            k(i, j) = w;
            total += w;
        }
        k.col(j) /= total;
    }
    return k;
}

namespace {

/// K * M * K^T with K stored sparse (it is banded).
Eigen::MatrixXd sandwich(const Eigen::SparseMatrix<double>& k, const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd tmp = k * m.transpose();
    return k * tmp.transpose();
}

}  // namespace

CorrelationMap apply_jitter(const CorrelationMap& map, double fwhm) {
    if (!(fwhm >= 0.0)) throw ValidationError("jitter_fwhm", "must be >= 0");
    if (fwhm == 0.0) return map;
    CorrelationMap out = map;
    out.values = sandwich(jitter_kernel(map.grid, fwhm).sparseView(), map.values);
    return out;
}

Eigen::VectorXd apply_jitter(const TimeGrid& grid, const Eigen::VectorXd& signal, double fwhm) {
    if (fwhm == 0.0) return signal;
    return jitter_kernel(grid, fwhm) * signal;
}

MapSet apply_jitter(const MapSet& maps, double fwhm) {
    if (!(fwhm >= 0.0)) throw ValidationError("jitter_fwhm", "must be >= 0");
    if (fwhm == 0.0) return maps;
    const Eigen::MatrixXd dense = jitter_kernel(maps.grid, fwhm);
    const Eigen::SparseMatrix<double> k = dense.sparseView();
    MapSet out = maps;
    out.intensity = k * maps.intensity;
    out.nn.values = sandwich(k, maps.nn.values);
    out.g2.values = sandwich(k, maps.g2.values);
    out.g1sq.values = sandwich(k, maps.g1sq.values);
    out.c2sq.values = sandwich(k, maps.c2sq.values);
    if (maps.cminus) out.cminus->values = sandwich(k, maps.cminus->values);
    return out;
}

CorrelationMap hom_map(const MapSet& maps, double phi) {
    Eigen::MatrixXd v = maps.nn.values - maps.g1sq.values + maps.g2.values - std::cos(2.0 * phi) * maps.c2sq.values;
    if (maps.cminus) v += 2.0 * std::cos(phi) * maps.cminus->values;
    return make_map(maps.grid, MapKind::G2, 0.5 * v);
}

void write_map_csv(std::ostream& os, const CorrelationMap& map, std::size_t stride) {
    if (stride == 0) throw ValidationError("stride", "must be >= 1");
    const auto old = os.precision(17);
    os << "t1,t2," << to_string(map.kind) << '\n';
    for (std::size_t i = 0; i < map.grid.n_points; i += stride) {
        for (std::size_t j = 0; j < map.grid.n_points; j += stride) {
            os << map.grid.center(i) << ',' << map.grid.center(j) << ','
               << map.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
        }
    }
    os.precision(old);
}

void write_map_binary(std::ostream& os, const CorrelationMap& map) {
    put_le<std::uint64_t>(os, static_cast<std::uint64_t>(map.values.rows()));
    put_le<std::uint64_t>(os, static_cast<std::uint64_t>(map.values.cols()));
    put_le<double>(os, map.grid.step);
    put_le<double>(os, map.grid.start);
    for (Eigen::Index i = 0; i < map.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < map.values.cols(); ++j) put_le<double>(os, map.values(i, j));
    }
}

CorrelationMap read_map_binary(std::istream& is, MapKind kind) {
    const auto rows = get_le<std::uint64_t>(is);
    const auto cols = get_le<std::uint64_t>(is);
    if (rows != cols || rows < 2 || rows > (1u << 20)) throw ParseError("unsupported map dimensions", 0);
    CorrelationMap m;
    m.kind = kind;
    m.grid.step = get_le<double>(is);
    m.grid.start = get_le<double>(is);
    m.grid.n_points = static_cast<std::size_t>(rows);
    m.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.values.cols(); ++j) m.values(i, j) = get_le<double>(is);
    }
    m.grid.validate();
    return m;
}

}  // namespace pne
