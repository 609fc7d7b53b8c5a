// One line per acceptance criterion. Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pne/correlations/hom.hpp"
#include "pne/correlations/maps.hpp"
#include "pne/correlations/quadrant.hpp"
#include "pne/dynamics/collision.hpp"
#include "pne/dynamics/dynamics.hpp"
#include "pne/estimators/concurrence.hpp"
#include "pne/estimators/report.hpp"
#include "pne/mps/mps.hpp"
#include "pne/timetags/timetags.hpp"

using namespace pne;

namespace {

const double kT1 = 136.0;
const double kGamma = 1.0 / kT1;
const double kHalf = kT1 * std::log(2.0);

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PulseSequence sequence(std::vector<double> dt, double tp = 0.0) {
    PulseSequence s;
    s.n_pulses = static_cast<int>(dt.size()) + 1;
    s.separations = std::move(dt);
    s.pulse_width = tp;
    return s;
}

MapSet ideal_phi_plus_maps() {
    AtomParams atom;
    const PulseSequence seq = sequence({kHalf});
    const TimeGrid grid = default_grid(atom, seq, 1.0);
    return build_maps(ideal_field_state(build_state(atom, seq), atom, seq, grid), 0.0, true);
}

/// Fraction of G2 in the diagonal (ee + ll) quadrants.
double leakage(const MapSet& maps, double threshold) {
    const QuadrantSummary q = quadrant_reduce(maps, threshold);
    const double diag = q.mu_bar[0] * q.mu_bar[0] * q.g2[0][0].value_or(0.0) +
                        q.mu_bar[1] * q.mu_bar[1] * q.g2[1][1].value_or(0.0);
    return diag / q.g2_total;
}

nlohmann::json load(const std::string& name) {
    std::ifstream in(std::string(PNE_TEST_DATA) + "/" + name);
    if (!in) throw std::runtime_error("missing test data " + name);
    return nlohmann::json::parse(in);
}

Outcome criterion1() {
    AtomParams atom;
    const auto t0 = std::chrono::steady_clock::now();
    const PhotonicState bell = build_state(atom, sequence({kHalf}));
    const PhotonicState w = build_state(atom, golden_schedule(3, kT1).sequence());
    const double elapsed = seconds_since(t0);
    double dev = 0.0;
    for (const auto& [bits, a] : bell.amplitudes()) dev = std::max(dev, std::abs(a - cplx(M_SQRT1_2, 0.0)));
    for (const auto& [bits, a] : w.amplitudes()) dev = std::max(dev, std::abs(a - cplx(1.0 / std::sqrt(3.0), 0.0)));
    const bool ok = bell.size() == 2 && w.size() == 3 && dev < 1e-12 && elapsed < 1e-3;
    return {ok, fmt("N=2 terms %zu, N=3 golden terms %zu, max |a - 1/sqrt(n)| = %.2e, %.3f ms", bell.size(), w.size(),
                    dev, elapsed * 1e3)};
}

Outcome criterion2() {
    const auto t0 = std::chrono::steady_clock::now();
    bool counts_ok = true;
    int first_bad = -1;
    for (int n = 0; n <= 20; ++n) {
        std::uint64_t brute = 0;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
            // Chronological bits, first bin most significant: every 0 must pair with a following 0.
            bool ok = true;
            for (int b = n - 1; b >= 0 && ok; --b) {
                if ((mask >> b) & 1) continue;
                ok = b >= 1 && !((mask >> (b - 1)) & 1);
                --b;
            }
            brute += ok;
        }
        if (brute != count_terms(n) && counts_ok) {
            counts_ok = false;
            first_bad = n;
        }
    }
    const PhotonicState s = build_state(AtomParams{}, sequence({50.0, 50.0, 50.0}));
    std::string keys;
    for (const auto& kv : s.amplitudes()) keys += (keys.empty() ? "" : " ") + kv.first;
    const double elapsed = seconds_since(t0);
    const bool ok = counts_ok && keys == "0000 0011 1001 1100 1111" && elapsed < 1.0;
    return {ok, fmt("counts match brute force for N<=20: %s%s; N=4 terms {%s}; %.3f s", counts_ok ? "yes" : "no",
                    first_bad >= 0 ? fmt(" (first mismatch N=%d)", first_bad).c_str() : "", keys.c_str(), elapsed)};
}

Outcome criterion3() {
    const auto t0 = std::chrono::steady_clock::now();
    AtomParams atom;
    PulseSequence none;
    none.n_pulses = 0;
    const double dt = 0.01 / kGamma;
    const CollisionResult decay = collision_evolve(atom, none, dt, InitialAtom::Excited, 8.0 * kT1);
    double decay_err = 0.0;
    for (std::size_t k = 0; k < decay.n_steps; ++k) {
        decay_err = std::max(decay_err, std::abs(decay.excited_population(static_cast<Eigen::Index>(k)) -
                                                 std::exp(-kGamma * static_cast<double>(k + 1) * dt)));
    }

    const double tp = 20.0;
    const PulseSequence one = sequence({}, tp);
    const TimeGrid g1 = default_grid(atom, one, 1.0);
    const TemporalWavefunctions sp = single_pulse(atom, 0.0, tp, g1);
    const CollisionResult oracle = collision_evolve(atom, one, 0.01);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    const double sp_p1 = rel(sp.p1, oracle.p1), sp_p2 = rel(sp.p2, oracle.p2);

    const PulseSequence two = sequence({kHalf}, tp);
    const TimeGrid g2 = default_grid(atom, two, 1.0);
    const TwoPulseDecomposition d = two_pulse(atom, 0.0, tp, kHalf, g2);
    const BinProbabilities& c = d.closed_form;
    const BinProbabilities& s = d.simulated;
    const double tw_p0 = rel(c.p0, s.p0), tw_p11 = rel(c.p11, s.p11), tw_p20 = rel(c.p20, s.p20);
    const double tw_p1 = rel(c.p1(), s.p1());
    const double elapsed = seconds_since(t0);

    const double worst = std::max({sp_p1, sp_p2, tw_p0, tw_p11, tw_p20, tw_p1});
    const bool ok = decay_err < 1e-3 && worst <= 0.02 && elapsed < 30.0;
    return {ok, fmt("decay max err %.2e; tp=20 rel. dev. single p1 %.2f%% p2 %.2f%%, two-pulse p0 %.2f%% p1 %.2f%% "
                    "p11 %.2f%% p20 %.1f%% (tol 2%%); %.1f s",
                    decay_err, 100 * sp_p1, 100 * sp_p2, 100 * tw_p0, 100 * tw_p1, 100 * tw_p11, 100 * tw_p20, elapsed)};
}

Outcome criterion4() {
    const BinProbabilities b = two_pulse_closed_form(kGamma, 1e-9, kHalf);
    const double dev = std::max(std::abs(b.p0 - 0.5), std::abs(b.p11 - 0.5));
    return {dev < 1e-6, fmt("p0 = %.9f, p11 = %.9f, max dev %.2e", b.p0, b.p11, dev)};
}

Outcome criterion5(const MapSet& maps) {
    const QuadrantSummary q = quadrant_reduce(maps, kHalf);
    const double devs[] = {std::abs(q.mu_bar[0] - 0.5), std::abs(q.mu_bar[1] - 0.5), std::abs(q.M_total - 0.5),
                           std::abs(*q.g2[0][0]),       std::abs(*q.g2[1][1]),       std::abs(*q.g2[0][1] - 2.0),
                           std::abs(q.g2_total - 1.0),  std::abs(q.c2_total - 0.5)};
    double worst = 0.0;
    for (double d : devs) worst = std::max(worst, d);
    return {worst < 1e-9, fmt("mu_e %.12f mu_l %.12f M %.12f g2_ee %.1e g2_ll %.1e g2_el %.12f g2 %.12f c2 %.12f; "
                              "max dev %.1e",
                              q.mu_bar[0], q.mu_bar[1], q.M_total, *q.g2[0][0], *q.g2[1][1], *q.g2[0][1], q.g2_total,
                              q.c2_total, worst)};
}

Outcome criterion6(const MapSet& maps) {
    const double mu2 = maps.mu() * maps.mu();
    const double M = maps.g1sq.integral() / mu2, g2 = maps.g2.integral() / mu2, c2 = maps.c2sq.integral() / mu2;
    const double cm = maps.cminus->integral() / mu2;
    double lo = 1e9, hi = -1e9;
    for (int k = 0; k <= 3600; ++k) {
        const double v = hom_g2(2.0 * M_PI * k / 3600.0, M, g2, c2, cm);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double expect_hi = 1.0 / maps.mu();
    const double dev = std::max(std::abs(lo - 0.5), std::abs(hi - expect_hi));
    return {dev < 1e-9, fmt("g2_HOM spans [%.12f, %.12f], expected [0.5, %.12f]", lo, hi, expect_hi)};
}

Outcome criterion7() {
    AtomParams atom;
    const PulseSequence one = sequence({});
    const TimeGrid grid = default_grid(atom, one, 1.0);
    const MapSet maps = build_maps(ideal_field_state(build_state(atom, one), atom, one, grid), 0.11 * kGamma);
    const double M = maps.g1sq.integral() / (maps.mu() * maps.mu());
    const double expect = 1.0 / (1.0 + 2.0 * 0.11);
    return {std::abs(M - 0.820) < 1e-3, fmt("M_s = %.6f (gamma/(gamma+2gamma*) = %.6f), target 0.820 +- 1e-3", M, expect)};
}

Outcome criterion8(const MapSet& ideal) {
    const double tp = 20.0, s = 50.0;
    const double estimate = overlap_fraction(kGamma, tp, s);
    // The estimate treats pulse width and jitter as one Gaussian blur of width sqrt(tp^2 + s^2).
    const double combined = leakage(apply_jitter(ideal, std::hypot(tp, s)), kHalf);
    const double jitter_only = leakage(apply_jitter(ideal, s), kHalf);

    AtomParams atom;
    atom.gamma_star = 0.11 * kGamma;
    const PulseSequence two = sequence({kHalf}, tp);
    const TimeGrid grid = default_grid(atom, two, 1.0);
    const MapSet model = apply_jitter(build_maps(simulate_field(atom, two, grid), atom.gamma_star), s);
    const double modelled = leakage(model, kHalf);

    const bool ok = std::abs(estimate - 0.15) <= 0.005 && std::abs(combined - estimate) <= 0.03;
    return {ok, fmt("estimate %.4f; ideal maps blurred by sqrt(tp^2+s^2): %.4f (|diff| %.4f, tol 0.03); "
                    "info: jitter-only %.4f, tp=20 model + jitter %.4f",
                    estimate, combined, std::abs(combined - estimate), jitter_only, modelled)};
}

Outcome criterion9() {
    const auto t0 = std::chrono::steady_clock::now();
    const EstimatorRequest phi = parse_estimator_request(load("phi_plus_measured.json"));
    const NumberProbabilities p = probabilities_from_moments(phi.moments);
    const double expect[] = {0.47, 0.05, 0.45, 0.032}, sig[] = {0.01, 0.04, 0.03, 0.003};
    bool probs_ok = true;
    for (int n = 0; n < 4; ++n) probs_ok = probs_ok && std::abs(p.p[n] - expect[n]) <= sig[n];

    const nlohmann::json rp = run_estimator(phi);
    const double f_phi = rp["fidelity"]["value"].get<double>();
    const double c_phi = rp["concurrence"]["mean"].get<double>();
    const double t_phi = seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    const nlohmann::json rs = run_estimator(parse_estimator_request(load("psi_plus_measured.json")));
    const double c_psi = rs["concurrence"]["mean"].get<double>();
    const double t_psi = seconds_since(t1);

    const bool f_ok = std::abs(f_phi - 0.79) <= 0.01;
    const bool c_phi_ok = std::abs(c_phi - 0.70) <= 0.03;
    const bool c_psi_ok = std::abs(c_psi - 0.81) <= 0.02;
    const bool time_ok = t_phi < 120.0 && t_psi < 120.0;
    const auto& fr = rp["fidelity"]["range"];
    return {probs_ok && f_ok && c_phi_ok && c_psi_ok && time_ok,
            fmt("p = (%.3f, %.3f, %.3f, %.4f) %s; F_phi+ = %.3f [%.3f, %.3f] vs 0.79+-0.01 %s; C_phi+ = %.3f+-%.3f "
                "vs 0.70+-0.03 %s; C_psi+ = %.3f+-%.3f vs 0.81+-0.02 %s; %.1f s / %.1f s per 1e5 samples",
                p.p[0], p.p[1], p.p[2], p.p[3], probs_ok ? "ok" : "FAIL", f_phi, fr[0].get<double>(),
                fr[1].get<double>(), f_ok ? "ok" : "FAIL", c_phi, rp["concurrence"]["std"].get<double>(),
                c_phi_ok ? "ok" : "FAIL", c_psi, rs["concurrence"]["std"].get<double>(), c_psi_ok ? "ok" : "FAIL",
                t_phi, t_psi)};
}

Outcome criterion10() {
    auto werner = [](double p) {
        Eigen::Vector4cd phi = Eigen::Vector4cd::Zero();
        phi(0) = phi(3) = M_SQRT1_2;
        return Eigen::Matrix4cd(p * phi * phi.adjoint() + (1.0 - p) * Eigen::Matrix4cd::Identity() / 4.0);
    };
    double werner_dev = 0.0;
    for (double p : {0.2, 0.5, 0.9}) {
        werner_dev = std::max(werner_dev, std::abs(wootters_concurrence(werner(p)) - std::max(0.0, (3.0 * p - 1.0) / 2.0)));
    }
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g;
    auto gaussian = [&](int n) {
        Eigen::MatrixXcd a(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = {g(rng), g(rng)};
        return a;
    };
    double lu_dev = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::Vector4cd psi = gaussian(4).col(0);
        psi.normalize();
        const Eigen::MatrixXcd a = gaussian(4);
        const Eigen::Matrix4cd mix = a * a.adjoint();
        const Eigen::Matrix4cd rho = 0.9 * psi * psi.adjoint() + 0.1 * mix / mix.trace().real();
        Eigen::HouseholderQR<Eigen::MatrixXcd> qa(gaussian(2)), qb(gaussian(2));
        const Eigen::Matrix2cd ua = qa.householderQ(), ub = qb.householderQ();
        Eigen::Matrix4cd u;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) u.block<2, 2>(2 * i, 2 * j) = ua(i, j) * ub;
        lu_dev = std::max(lu_dev, std::abs(wootters_concurrence(rho) - wootters_concurrence(Eigen::Matrix4cd(u * rho * u.adjoint()))));
    }
    return {werner_dev < 1e-9 && lu_dev < 1e-9,
            fmt("Werner max dev %.1e at p in {0.2, 0.5, 0.9}; local-unitary max dev %.1e over 100 trials", werner_dev, lu_dev)};
}

Outcome criterion11() {
    const auto t0 = std::chrono::steady_clock::now();
    AtomParams atom;
    atom.gamma_star = 0.11 * kGamma;
    const PulseSequence two = sequence({kHalf}, 20.0);
    const TimeGrid grid = default_grid(atom, two, 1.0);
    const SourceModel src = SourceModel::from_field(simulate_field(atom, two, grid), atom.gamma_star, false);
    const MomentSet closed = moments_from_probabilities(src.emission->number_probabilities());

    DetectionConfig cfg;
    cfg.n_pulses = 10000000;
    cfg.jitter_fwhm = 50.0;
    cfg.seed = 1234;
    cfg.efficiency = {1.0};
    const G2Histogram full = histogram_g2(generate_events(src, Topology::Hbt3, cfg), cfg);
    cfg.efficiency = {0.3};
    cfg.seed = 4321;
    const G2Histogram lossy = histogram_g2(generate_events(src, Topology::Hbt3, cfg), cfg);
    const double elapsed = seconds_since(t0);

    const double z_closed = std::abs(full.g2_zero - closed.g2) / full.sigma;
    const double z_loss = std::abs(full.g2_zero - lossy.g2_zero) / std::hypot(full.sigma, lossy.sigma);
    const bool ok = z_closed <= 3.0 && z_loss <= 3.0 && elapsed < 300.0;
    return {ok, fmt("g2(0) = %.4f+-%.4f vs closed form %.4f (%.1f sigma); eta 0.3: %.4f+-%.4f (%.1f sigma apart); "
                    "%.1f s",
                    full.g2_zero, full.sigma, closed.g2, z_closed, lossy.g2_zero, lossy.sigma, z_loss, elapsed)};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& run) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
    };

    report(1, "Bell-state generation", criterion1);
    report(2, "Fibonacci structure", criterion2);
    report(3, "Collision-model oracle", criterion3);
    report(4, "Ideal two-pulse limits", criterion4);
    const MapSet ideal = ideal_phi_plus_maps();
    report(5, "Quadrant analysis", [&] { return criterion5(ideal); });
    report(6, "HOM range", [&] { return criterion6(ideal); });
    report(7, "Dephasing identity", criterion7);
    report(8, "Jitter/pulse overlap", [&] { return criterion8(ideal); });
    report(9, "Estimator regression", criterion9);
    report(10, "Wootters oracle", criterion10);
    report(11, "Monte Carlo consistency", criterion11);
    std::printf("[SKIP] 12 Experimental-scale claims: not reproducible at desk scale (absolute count rates, device "
                "brightness, measured g2_ll background excess); covered by the property suites instead\n");
    std::printf("%d of 11 checked criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
