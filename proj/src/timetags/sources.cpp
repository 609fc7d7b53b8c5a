#include <algorithm>
#include <cmath>

#include "pne/core/errors.hpp"
#include "pne/timetags/timetags.hpp"

namespace pne {
namespace {

std::vector<double> cumulative(const double* w, std::size_t n) {
    std::vector<double> cdf(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += std::max(0.0, w[i]);
        cdf[i] = acc;
    }
    return cdf;
}

/// Index k with cdf[k-1] <= u * total < cdf[k].
std::size_t pick(const std::vector<double>& cdf, double u) {
    const double x = u * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), x);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

}  // namespace

FieldStateEmission::FieldStateEmission(const FieldState& field) : grid_(field.grid) {
    field.validate(1e-6);
    const std::size_t n = field.grid.n_points;
    const double h = field.grid.step;
    p_ = {field.p0(), field.p1(), field.p2(), std::max(0.0, field.deficit)};
    const double total = p_[0] + p_[1] + p_[2] + p_[3];
    if (!(total > 0.0)) throw ValidationError("field", "carries no probability");
    for (double& p : p_) p /= total;

    const Eigen::VectorXd w1 = field.psi1.cwiseAbs2();
    cdf1_ = cumulative(w1.data(), n);
    // Row-major flattening of |phi|^2 over the full square; an unordered pair is drawn once.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w2 = field.phi.cwiseAbs2();
    cdf2_ = cumulative(w2.data(), n * n);
    const Eigen::VectorXd wi = w1 + 2.0 * h * field.phi.cwiseAbs2().rowwise().sum();
    cdf_intensity_ = cumulative(wi.data(), n);
    if (p_[1] > 0.0 && !(cdf1_.back() > 0.0)) throw ValidationError("field", "one-photon part is empty");
}

void FieldStateEmission::sample(std::mt19937_64& rng, std::vector<double>& times) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    const double h = grid_.step;
    auto cell_time = [&](std::size_t i) { return grid_.edge(i) + h * unit(rng); };
    if (u < p_[0]) return;
    if (u < p_[0] + p_[1]) {
        times.push_back(cell_time(pick(cdf1_, unit(rng))));
    } else if (u < p_[0] + p_[1] + p_[2]) {
        const std::size_t idx = pick(cdf2_, unit(rng));
        const std::size_t n = grid_.n_points;
        times.push_back(cell_time(idx / n));
        times.push_back(cell_time(idx % n));
    } else {
        for (int k = 0; k < 3; ++k) times.push_back(cell_time(pick(cdf_intensity_, unit(rng))));
    }
}

IndependentEmission::IndependentEmission(std::vector<double> pn, double gamma) : pn_(std::move(pn)), gamma_(gamma) {
    if (pn_.empty()) throw ValidationError("pn", "needs at least one entry");
    if (!(gamma_ > 0.0)) throw ValidationError("gamma", "must be > 0");
    double total = 0.0;
    for (double p : pn_) {
        if (!(p >= 0.0)) throw ValidationError("pn", "probabilities must be >= 0");
        total += p;
    }
    if (!(total > 0.0)) throw ValidationError("pn", "must not sum to zero");
    for (double& p : pn_) p /= total;
    cdf_ = cumulative(pn_.data(), pn_.size());
}

IndependentEmission IndependentEmission::coherent(double mu, double gamma) {
    if (!(mu >= 0.0)) throw ValidationError("mu", "must be >= 0");
    // Poisson weights up to where the tail is below 1e-16.
    std::vector<double> pn;
    double p = std::exp(-mu);
    for (int n = 0; n < 200; ++n) {
        pn.push_back(p);
        p *= mu / (n + 1);
        if (n > mu && p < 1e-16) break;
    }
    return IndependentEmission(std::move(pn), gamma);
}

IndependentEmission IndependentEmission::single_photon(double gamma) { return IndependentEmission({0.0, 1.0}, gamma); }

void IndependentEmission::sample(std::mt19937_64& rng, std::vector<double>& times) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = pick(cdf_, unit(rng));
    for (std::size_t k = 0; k < n; ++k) times.push_back(-std::log1p(-unit(rng)) / gamma_);
}

std::array<double, 4> IndependentEmission::number_probabilities() const {
    std::array<double, 4> p{0.0, 0.0, 0.0, 0.0};
    for (std::size_t n = 0; n < std::min<std::size_t>(4, pn_.size()); ++n) p[n] = pn_[n];
    return p;
}

SourceModel SourceModel::from_field(const FieldState& field, double gamma_star, bool with_mzi_maps) {
    SourceModel s;
    s.emission = std::make_shared<FieldStateEmission>(field);
    if (with_mzi_maps) s.maps = build_maps(field, gamma_star, true);
    return s;
}

}  // namespace pne
