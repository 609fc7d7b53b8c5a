#include "pne/estimators/fidelity.hpp"

#include <algorithm>
#include <cmath>

#include "pne/core/errors.hpp"

namespace pne {
namespace {

void check_unit(const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(name, "must lie in [0, 1]");
}

void check_proportions(double e, double l) {
    check_unit("mu_bar_e", e);
    check_unit("mu_bar_l", l);
    if (std::abs(e + l - 1.0) > 1e-6) throw ValidationError("mu_bar", "mu_bar_e + mu_bar_l must equal 1");
}

}  // namespace

FidelityEstimate fidelity_psi_plus(const PsiPlusInputs& in) {
    check_proportions(in.mu_bar_e, in.mu_bar_l);
    check_unit("M_ee", in.M_ee);
    check_unit("M_ll", in.M_ll);
    check_unit("M_el", in.M_el);
    if (!(in.mu_tilde_pi >= 0.0)) throw ValidationError("mu_tilde_pi", "must be >= 0");

    const double shape = in.mu_bar_e * std::sqrt(in.M_ee) + in.mu_bar_l * std::sqrt(in.M_ll) +
                         2.0 * std::sqrt(in.mu_bar_e * in.mu_bar_l * in.M_el);
    FidelityEstimate f;
    f.value = 0.5 * in.mu_tilde_pi * shape;
    const double lo = 0.5 * std::min(in.p1, in.mu_pi) * shape;
    const double hi = 0.5 * std::max(in.p1, in.mu_pi) * shape;
    f.range_min = lo;
    f.range_max = hi;
    if (in.M_s) {
        check_unit("M_s", *in.M_s);
        f.bound = in.p1 * std::sqrt(*in.M_s);
    }
    return f;
}

FidelityEstimate fidelity_phi_plus(const PhiPlusInputs& in) {
    if (!(in.p2 > 0.0)) throw ValidationError("p2", "must be > 0 (the estimate divides by p2)");
    check_proportions(in.mu_bar_e, in.mu_bar_l);
    check_unit("M_ee", in.M_ee);
    check_unit("M_ll", in.M_ll);
    check_unit("c2_el", in.c2_el);
    if (!(in.p0 >= 0.0)) throw ValidationError("p0", "must be >= 0");
    if (!(in.mu_tilde >= 0.0)) throw ValidationError("mu_tilde", "must be >= 0");

    const double a = in.mu_bar_e * in.mu_bar_l * std::sqrt(in.M_ee * in.M_ll) / in.p2;
    const double b = 2.0 * std::sqrt(in.mu_bar_e * in.mu_bar_l * in.c2_el);
    auto at = [&](double mt) { return 0.5 * (in.p0 + a * mt * mt + b * mt); };

    FidelityEstimate f;
    f.value = at(in.mu_tilde);
    // Increasing in mu~ >= 0, so the interval ends are the extremes.
    const double x0 = std::min(2.0 * in.p2, in.mu), x1 = std::max(2.0 * in.p2, in.mu);
    f.range_min = at(x0);
    f.range_max = at(x1);
    return f;
}

}  // namespace pne
