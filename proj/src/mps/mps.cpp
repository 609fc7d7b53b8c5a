#include "pne/mps/mps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "pne/core/errors.hpp"

namespace pne {

Isometry Isometry::make(int m, double gamma, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("separations", "must be finite and > 0");
    Isometry v;
    v.m = m;
    v.alpha = std::exp(-0.5 * gamma * dt);
    v.beta = std::sqrt(-std::expm1(-gamma * dt));
    return v;
}

double GoldenSchedule::delta_t(int m) const {
    if (m < 2 || m > n_pulses) throw ValidationError("m", "must lie in [2, N]");
    return separations[static_cast<std::size_t>(n_pulses - m)];
}

PulseSequence GoldenSchedule::sequence() const {
    PulseSequence seq;
    seq.n_pulses = n_pulses;
    seq.separations = separations;
    return seq;
}

PhotonicState build_state(const AtomParams& atom, const PulseSequence& seq) {
    atom.validate();
    seq.validate();
    if (seq.pulse_width != 0.0) throw ValidationError("tp", "the ideal model needs pulse_width = 0");
    const int n = seq.n_pulses;
    if (n == 0) return PhotonicState(0, {{"", cplx{1.0, 0.0}}});

    // prev2 = psi_{k-2}, prev1 = psi_{k-1}; psi_0 is empty, psi_1 = |1>.
    PhotonicState::AmplitudeMap prev2{{"", cplx{1.0, 0.0}}};
    PhotonicState::AmplitudeMap prev1{{"1", cplx{1.0, 0.0}}};
    for (int k = 2; k <= n; ++k) {
        const Isometry v = Isometry::make(k, atom.gamma, seq.separation_from_end(k));
        PhotonicState::AmplitudeMap next;
        for (const auto& [bits, amp] : prev2) next.emplace("00" + bits, v.alpha * amp);
        for (const auto& [bits, amp] : prev1) next.emplace("1" + bits, v.beta * amp);
        prev2 = std::move(prev1);
        prev1 = std::move(next);
    }
    return PhotonicState(static_cast<std::size_t>(n), std::move(prev1));
}

std::uint64_t count_terms(int n) {
    if (n < 0) throw ValidationError("N", "must be >= 0");
    std::uint64_t a = 1, b = 1;  // F_{k-1}, F_k
    for (int k = 1; k < n; ++k) {
        if (b > std::numeric_limits<std::uint64_t>::max() - a) throw ValidationError("N", "F_N overflows");
        const std::uint64_t c = a + b;
        a = b;
        b = c;
    }
    return b;
}

GoldenSchedule golden_schedule(int n, double t1) {
    if (n < 2) throw ValidationError("N", "golden schedule needs N >= 2");
    if (!(t1 > 0.0)) throw ValidationError("gamma", "T1 must be > 0");
    GoldenSchedule g;
    g.n_pulses = n;
    g.t1 = t1;
    for (int k = 0; k <= n; ++k) g.fib.push_back(count_terms(k));
    g.separations.resize(static_cast<std::size_t>(n - 1));
    for (int m = 2; m <= n; ++m) {
        const double ratio = static_cast<double>(g.fib[static_cast<std::size_t>(m)]) /
                             static_cast<double>(g.fib[static_cast<std::size_t>(m - 2)]);
        g.separations[static_cast<std::size_t>(n - m)] = t1 * std::log(ratio);
    }
    return g;
}

TimeBinPartition w_state_thresholds(int n, double t1) {
    if (n < 2) throw ValidationError("N", "needs at least two bins");
    if (!(t1 > 0.0)) throw ValidationError("gamma", "T1 must be > 0");
    TimeBinPartition p;
    for (int m = 1; m < n; ++m) {
        p.thresholds.push_back(t1 * std::log(static_cast<double>(n) / static_cast<double>(n - m)));
    }
    p.validate();
    return p;
}

Eigen::VectorXd bipartition_amplitudes(const PhotonicState& state, std::size_t cut) {
    if (cut < 1 || cut >= state.n_bins()) throw ValidationError("cut", "must lie in [1, n_bins)");
    // Compact reshape: rows are distinct prefixes, columns distinct suffixes that occur.
    std::unordered_map<std::string, Eigen::Index> rows, cols;
    for (const auto& kv : state.amplitudes()) {
        rows.emplace(kv.first.substr(0, cut), static_cast<Eigen::Index>(rows.size()));
        cols.emplace(kv.first.substr(cut), static_cast<Eigen::Index>(cols.size()));
    }
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()),
                                                static_cast<Eigen::Index>(cols.size()));
    for (const auto& [bits, amp] : state.amplitudes()) {
        a(rows.at(bits.substr(0, cut)), cols.at(bits.substr(cut))) = amp;
    }
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues();
    if (sv.size() == 0) return sv;
    Eigen::Index keep = 0;
    while (keep < sv.size() && sv(keep) > 1e-14 * sv(0)) ++keep;
    return sv.head(keep);
}

std::string state_to_json(const PhotonicState& state) {
    nlohmann::json j;
    j["n_bins"] = state.n_bins();
    j["terms"] = nlohmann::json::array();
    for (const auto& [bits, amp] : state.amplitudes()) {
        j["terms"].push_back({{"bits", bits}, {"re", amp.real()}, {"im", amp.imag()}});
    }
    return j.dump(2);
}

PhotonicState state_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), 0);
    }
    try {
        PhotonicState::AmplitudeMap amps;
        for (const auto& t : j.at("terms")) {
            amps.emplace(t.at("bits").get<std::string>(),
                         cplx{t.at("re").get<double>(), t.value("im", 0.0)});
        }
        return PhotonicState(j.at("n_bins").get<std::size_t>(), std::move(amps));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what(), 0);
    }
}

}  // namespace pne
