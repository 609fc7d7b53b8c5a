#include "pne/estimators/density_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "pne/core/errors.hpp"

namespace pne {
namespace {

int packed(int i, int j) {
    if (i > j) std::swap(i, j);
    // Row-major upper triangle of a 4x4 matrix.
    return i * 4 - i * (i - 1) / 2 + (j - i);
}

const char* label(int i) {
    static const char* names[] = {"00", "01", "10", "11"};
    return names[i];
}

/// First-order propagation by central differences over a list of (perturbation, sigma).
double propagate(const std::function<double(int, double)>& f, const std::vector<double>& sigmas) {
    double var = 0.0;
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
        if (sigmas[k] == 0.0) continue;
        const double h = 1e-6;
        const double d = (f(static_cast<int>(k), h) - f(static_cast<int>(k), -h)) / (2.0 * h);
        var += d * d * sigmas[k] * sigmas[k];
    }
    return std::sqrt(var);
}

void set_measured(PartialDensityMatrix& dm, int i, int j, double value, double sigma) {
    DmElement& e = dm.at(i, j);
    e.status = ElementStatus::Measured;
    e.value = value;
    e.sigma = sigma;
}

void set_bounded(PartialDensityMatrix& dm, int i, double upper) {
    DmElement& e = dm.at(i, i);
    e.status = ElementStatus::Bounded;
    e.upper = std::max(0.0, upper);
}

/// Clamp measured off-diagonals to the Cauchy-Schwarz cap of the (ceiling) diagonals.
void enforce_caps(PartialDensityMatrix& dm) {
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            DmElement& e = dm.at(i, j);
            const double cap = std::sqrt(dm.diagonal_ceiling(i) * dm.diagonal_ceiling(j));
            e.upper = cap;
            if (e.status == ElementStatus::Measured && e.value > cap * (1.0 + 1e-12)) {
                std::ostringstream os;
                os << "rho_" << label(i) << label(j) << " = " << e.value << " exceeds its cap " << cap
                   << "; clamped";
                dm.warnings.push_back(os.str());
                e.value = cap;
            }
        }
    }
}

}  // namespace

PartialDensityMatrix::PartialDensityMatrix() {
    for (int i = 0; i < 4; ++i) at(i, i).status = ElementStatus::Bounded;
}

DmElement& PartialDensityMatrix::at(int i, int j) { return upper_[static_cast<std::size_t>(packed(i, j))]; }
const DmElement& PartialDensityMatrix::at(int i, int j) const {
    return upper_[static_cast<std::size_t>(packed(i, j))];
}

double PartialDensityMatrix::diagonal_ceiling(int i) const {
    const DmElement& e = at(i, i);
    return e.status == ElementStatus::Measured ? std::max(0.0, e.value) : e.upper;
}

Eigen::Matrix4cd PartialDensityMatrix::central() const {
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int i = 0; i < 4; ++i) {
        rho(i, i) = diagonal_ceiling(i);
        for (int j = i + 1; j < 4; ++j) {
            const DmElement& e = at(i, j);
            if (e.status == ElementStatus::Measured) {
                rho(i, j) = e.value;
                rho(j, i) = e.value;
            }
        }
    }
    return rho;
}

PartialDensityMatrix build_partial_dm(const PsiPlusInputs& in, const PsiPlusSigmas& s,
                                      const NumberProbabilities& probs) {
    fidelity_psi_plus(in);  // validates ranges

    // k: 0 mu_tilde_pi, 1 mu_bar_e (mu_bar_l follows), 2 M_ee, 3 M_ll, 4 M_el.
    auto perturbed = [&](int k, double h) {
        PsiPlusInputs p = in;
        if (k == 0) p.mu_tilde_pi += h;
        if (k == 1) { p.mu_bar_e += h; p.mu_bar_l -= h; }
        if (k == 2) p.M_ee += h;
        if (k == 3) p.M_ll += h;
        if (k == 4) p.M_el += h;
        return p;
    };
    auto rho_ee = [&](int k, double h) { auto p = perturbed(k, h); return p.mu_tilde_pi * p.mu_bar_e * std::sqrt(std::max(0.0, p.M_ee)); };
    auto rho_ll = [&](int k, double h) { auto p = perturbed(k, h); return p.mu_tilde_pi * p.mu_bar_l * std::sqrt(std::max(0.0, p.M_ll)); };
    auto rho_el = [&](int k, double h) {
        auto p = perturbed(k, h);
        return p.mu_tilde_pi * std::sqrt(std::max(0.0, p.mu_bar_e * p.mu_bar_l * p.M_el));
    };
    const std::vector<double> sig{s.mu_tilde_pi, s.mu_bar, s.M_ee, s.M_ll, s.M_el};

    PartialDensityMatrix dm;
    const int e = dm_index(1, 0), l = dm_index(0, 1);
    set_measured(dm, e, e, rho_ee(0, 0.0), propagate(rho_ee, sig));
    set_measured(dm, l, l, rho_ll(0, 0.0), propagate(rho_ll, sig));
    set_measured(dm, l, e, rho_el(0, 0.0), propagate(rho_el, sig));
    set_bounded(dm, dm_index(0, 0), probs.p[0]);
    set_bounded(dm, dm_index(1, 1), probs.p[2]);
    enforce_caps(dm);
    return dm;
}

PartialDensityMatrix build_partial_dm(const PhiPlusInputs& in, const PhiPlusSigmas& s,
                                      const NumberProbabilities& probs) {
    fidelity_phi_plus(in);

    // k: 0 p0, 1 p2, 2 mu_tilde, 3 mu_bar_e (mu_bar_l follows), 4 M_ee, 5 M_ll, 6 c2_el.
    auto perturbed = [&](int k, double h) {
        PhiPlusInputs p = in;
        if (k == 0) p.p0 += h;
        if (k == 1) p.p2 += h;
        if (k == 2) p.mu_tilde += h;
        if (k == 3) { p.mu_bar_e += h; p.mu_bar_l -= h; }
        if (k == 4) p.M_ee += h;
        if (k == 5) p.M_ll += h;
        if (k == 6) p.c2_el += h;
        return p;
    };
    auto rho_00 = [&](int k, double h) { return perturbed(k, h).p0; };
    auto rho_11 = [&](int k, double h) {
        auto p = perturbed(k, h);
        return p.mu_tilde * p.mu_tilde / p.p2 * p.mu_bar_e * p.mu_bar_l * std::sqrt(std::max(0.0, p.M_ee * p.M_ll));
    };
    auto rho_0011 = [&](int k, double h) {
        auto p = perturbed(k, h);
        return p.mu_tilde * std::sqrt(std::max(0.0, p.mu_bar_e * p.mu_bar_l * p.c2_el));
    };
    const std::vector<double> sig{s.p0, s.p2, s.mu_tilde, s.mu_bar, s.M_ee, s.M_ll, s.c2_el};

    PartialDensityMatrix dm;
    const int vac = dm_index(0, 0), pair = dm_index(1, 1);
    set_measured(dm, vac, vac, rho_00(0, 0.0), propagate(rho_00, sig));
    set_measured(dm, pair, pair, rho_11(0, 0.0), propagate(rho_11, sig));
    set_measured(dm, vac, pair, rho_0011(0, 0.0), propagate(rho_0011, sig));
    set_bounded(dm, dm_index(0, 1), probs.p[1]);
    set_bounded(dm, dm_index(1, 0), probs.p[1]);
    enforce_caps(dm);
    return dm;
}

}  // namespace pne
