#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "pne/core/errors.hpp"
#include "pne/estimators/density_matrix.hpp"

namespace pne {
namespace detail {

/// Concurrence from a Hermitian eigendecomposition rho = V diag(d) V^H. The Wootters
/// lambdas are the singular values of S^H (sy x sy) conj(S) with S = V sqrt(d), which
/// avoids a second square root of the spin-flipped product.
template <typename Real>
Real concurrence_from_eigen(const Eigen::Matrix<std::complex<Real>, 4, 4>& V, const Eigen::Matrix<Real, 4, 1>& d) {
    using C = std::complex<Real>;
    Eigen::Matrix<C, 4, 4> S = V;
    for (int k = 0; k < 4; ++k) S.col(k) *= std::sqrt(std::max(d(k), Real(0)));
    Eigen::Matrix<C, 4, 4> Y = Eigen::Matrix<C, 4, 4>::Zero();
    Y(0, 3) = Y(3, 0) = C(-1);
    Y(1, 2) = Y(2, 1) = C(1);
    const Eigen::Matrix<C, 4, 4> A = S.adjoint() * Y * S.conjugate();
    Eigen::Matrix<Real, 4, 1> lambda = Eigen::JacobiSVD<Eigen::Matrix<C, 4, 4>>(A).singularValues();
    // JacobiSVD sorts in decreasing order.
    const Real c = lambda(0) - lambda(1) - lambda(2) - lambda(3);
    return std::max(c, Real(0));
}

}  // namespace detail

/// Wootters concurrence max(0, l1 - l2 - l3 - l4) of a 4x4 Hermitian PSD matrix. The trace is
/// not renormalised, so C(k rho) = k C(rho). Accepts real or complex scalar matrices.
/// Throws ValidationError for non-Hermitian input or an eigenvalue below -1e-10.
template <typename Derived>
auto wootters_concurrence(const Eigen::MatrixBase<Derived>& rho) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    using C = std::complex<Real>;
    if (rho.rows() != 4 || rho.cols() != 4) throw ValidationError("rho", "must be 4x4");
    const Eigen::Matrix<C, 4, 4> m = rho.template cast<C>();
    const Real scale = std::max(Real(1), m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > Real(1e-10) * scale) {
        throw ValidationError("rho", "not Hermitian within 1e-10");
    }
    const Eigen::Matrix<C, 4, 4> h = (m + m.adjoint()) / Real(2);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<C, 4, 4>> es(h);
    if (es.eigenvalues().minCoeff() < Real(-1e-10)) {
        throw ValidationError("rho", "has an eigenvalue below -1e-10");
    }
    return detail::concurrence_from_eigen<Real>(es.eigenvectors().eval(), es.eigenvalues().eval());
}

struct ConcurrenceEstimate {
    double mean = 0.0;
    double std = 0.0;
    /// Mean of C / trace(rho) over the same samples, for comparison with a renormalised block.
    double normalized_mean = 0.0;
    std::array<std::uint64_t, 64> histogram{};  ///< 64 equal bins on [0, 1]
    std::uint64_t n_accepted = 0;
    std::uint64_t n_rejected = 0;

    double acceptance_rate() const;
};

struct SamplerOptions {
    std::uint64_t n_samples = 100000;
    std::uint64_t seed = 1;
    /// Worker threads. Results depend on (seed, chunk_size) only, not on the worker count.
    unsigned workers = 1;
    std::uint64_t chunk_size = 4096;
    bool include_measurement_noise = true;  ///< false: measured elements fixed at their value
};

/// Rejection sampling of physical completions of `pdm`: measured elements ~ N(value, sigma),
/// bounded diagonals ~ U[0, upper], free off-diagonals with magnitude ~ U[0, sqrt(rho_ii rho_jj)]
/// and phase ~ U[0, 2 pi). A draw is kept iff its smallest eigenvalue is >= -1e-10.
/// Throws NumericalError if a chunk has accepted < 1e-4 of 10^7 attempts.
ConcurrenceEstimate sample_concurrence(const PartialDensityMatrix& pdm, const SamplerOptions& opt);

/// Element-wise constructor of a single draw, exposed for tests.
Eigen::Matrix4cd draw_density_matrix(const PartialDensityMatrix& pdm, std::uint64_t seed, bool noise = true);

}  // namespace pne
