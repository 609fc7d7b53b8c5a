#include <algorithm>
#include <cmath>

#include "pne/core/errors.hpp"
#include "pne/timetags/timetags.hpp"

namespace pne {
namespace {

std::pair<std::size_t, std::size_t> index_range(const EventStream& s, std::uint64_t t_begin, std::uint64_t t_end) {
    const auto b = std::lower_bound(s.time_ps.begin(), s.time_ps.end(), t_begin);
    const auto e = std::lower_bound(b, s.time_ps.end(), t_end);
    return {static_cast<std::size_t>(b - s.time_ps.begin()), static_cast<std::size_t>(e - s.time_ps.begin())};
}

/// Pulse index and time relative to that pulse's excitation.
struct PulseTime {
    std::int64_t pulse;
    double rel;
};

PulseTime pulse_time(const DetectionConfig& cfg, std::uint64_t t) {
    const double x = static_cast<double>(t) - cfg.clock_offset;
    const auto k = static_cast<std::int64_t>(std::floor((x + 0.5 * cfg.rep_period) / cfg.rep_period));
    return {k, x - static_cast<double>(k) * cfg.rep_period};
}

/// Sum over ordered detector pairs a < b of eta_a eta_b s_a s_b, with s the routing fraction.
double pair_weight(const DetectionConfig& cfg, Topology topology) {
    const int n = detector_count(topology);
    const double split = 1.0 / n;
    double w = 0.0;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) w += cfg.efficiency_of(a) * cfg.efficiency_of(b) * split * split;
    }
    return w;
}

}  // namespace

G2Histogram histogram_g2(const EventStream& stream, const DetectionConfig& cfg, int side_peaks, std::uint64_t t_begin,
                         std::uint64_t t_end) {
    if (side_peaks < 10) throw ValidationError("side_peaks", "at least 10 side peaks are needed for normalisation");
    if (!(cfg.bin_width > 0.0) || !(cfg.rep_period > 0.0)) throw ValidationError("bin_width", "must be > 0");
    const auto [i0, i1] = index_range(stream, t_begin, t_end);
    const double span_begin = static_cast<double>(t_begin);
    const double span_end = t_end != UINT64_MAX ? static_cast<double>(t_end)
                            : i1 > i0          ? static_cast<double>(stream.time_ps[i1 - 1]) + 1.0
                                               : span_begin;
    const double periods = (span_end - span_begin) / cfg.rep_period;
    if (periods < 100.0) throw ValidationError("stream", "must span at least 100 repetition periods");
    if (periods < 4.0 * (side_peaks + 2)) throw NumericalError("too few periods for the requested side peaks");

    const int m_max = side_peaks + 1;
    const double tau_max = (m_max + 0.5) * cfg.rep_period;
    const auto n_fine = static_cast<std::size_t>(std::ceil(2.0 * tau_max / cfg.bin_width));

    G2Histogram h;
    h.fine_counts.assign(n_fine, 0);
    h.tau.resize(n_fine);
    for (std::size_t k = 0; k < n_fine; ++k) h.tau[k] = -tau_max + (static_cast<double>(k) + 0.5) * cfg.bin_width;
    std::vector<double> peaks(static_cast<std::size_t>(2 * m_max + 1), 0.0);

    for (std::size_t i = i0; i < i1; ++i) {
        const double ti = static_cast<double>(stream.time_ps[i]);
        for (std::size_t j = i + 1; j < i1; ++j) {
            const double dt = static_cast<double>(stream.time_ps[j]) - ti;
            if (dt >= tau_max) break;
            if (stream.detector[j] == stream.detector[i]) continue;
            // tau = t(higher id) - t(lower id).
            const double tau = stream.detector[j] > stream.detector[i] ? dt : -dt;
            const auto fb = static_cast<std::size_t>(std::floor((tau + tau_max) / cfg.bin_width));
            if (fb < n_fine) ++h.fine_counts[fb];
            const auto m = static_cast<int>(std::floor(tau / cfg.rep_period + 0.5));
            if (std::abs(m) <= m_max) peaks[static_cast<std::size_t>(m + m_max)] += 1.0;
        }
    }

    // Peak m only collects pulse pairs (k, k + m) inside the span.
    double side_sum = 0.0, side_raw = 0.0;
    int n_side = 0;
    for (int m = -m_max; m <= m_max; ++m) {
        const double raw = peaks[static_cast<std::size_t>(m + m_max)];
        const double corrected = raw * periods / (periods - std::abs(m));
        h.peak_index.push_back(m);
        h.peak_counts.push_back(corrected);
        if (std::abs(m) >= 2) {
            side_sum += corrected;
            side_raw += raw;
            ++n_side;
        }
    }
    h.side_mean = side_sum / n_side;
    if (!(h.side_mean > 0.0)) throw NumericalError("no uncorrelated coincidences in the side peaks");
    const double zero = peaks[static_cast<std::size_t>(m_max)];
    h.g2_zero = zero / h.side_mean;
    h.sigma = std::sqrt(zero + (zero == 0.0 ? 1.0 : 0.0)) / h.side_mean;
    if (side_raw > 0.0) h.sigma = std::hypot(h.sigma, h.g2_zero / std::sqrt(side_raw));
    return h;
}

G3Histogram histogram_g3(const EventStream& stream, const DetectionConfig& cfg, int half_width, double square) {
    if (stream.n_detectors < 3) throw ValidationError("stream", "triple coincidences need three detectors");
    if (half_width < 2) throw ValidationError("half_width", "must be >= 2 to leave reference squares");
    if (!(square > 0.0 && square <= cfg.rep_period)) throw ValidationError("square", "must lie in (0, rep_period]");
    if (stream.size() == 0) throw NumericalError("empty stream");
    const double periods =
        (static_cast<double>(stream.time_ps.back()) - static_cast<double>(stream.time_ps.front())) / cfg.rep_period;
    if (periods < 100.0) throw ValidationError("stream", "must span at least 100 repetition periods");

    std::vector<std::uint64_t> on[3];
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (stream.detector[i] < 3) on[stream.detector[i]].push_back(stream.time_ps[i]);
    }
    const int w = 2 * half_width + 1;
    G3Histogram g;
    g.half_width = half_width;
    g.counts = Eigen::MatrixXd::Zero(w, w);
    const double reach = (half_width + 0.5) * cfg.rep_period;
    const double half = 0.5 * square;

    auto window = [&](const std::vector<std::uint64_t>& v, double t, std::size_t& lo, std::size_t& hi) {
        while (lo < v.size() && static_cast<double>(v[lo]) < t - reach) ++lo;
        if (hi < lo) hi = lo;
        while (hi < v.size() && static_cast<double>(v[hi]) <= t + reach) ++hi;
    };
    auto square_of = [&](double tau, int& m) {
        m = static_cast<int>(std::floor(tau / cfg.rep_period + 0.5));
        return std::abs(m) <= half_width && std::abs(tau - m * cfg.rep_period) < half;
    };
    std::size_t lo1 = 0, hi1 = 0, lo2 = 0, hi2 = 0;
    for (std::uint64_t t0u : on[0]) {
        const double t0 = static_cast<double>(t0u);
        window(on[1], t0, lo1, hi1);
        window(on[2], t0, lo2, hi2);
        for (std::size_t j = lo1; j < hi1; ++j) {
            int m1 = 0;
            if (!square_of(static_cast<double>(on[1][j]) - t0, m1)) continue;
            for (std::size_t l = lo2; l < hi2; ++l) {
                int m2 = 0;
                if (!square_of(static_cast<double>(on[2][l]) - t0, m2)) continue;
                g.counts(m1 + half_width, m2 + half_width) += 1.0;
            }
        }
    }

    g.normalized = Eigen::MatrixXd::Zero(w, w);
    double ref = 0.0, ref_raw = 0.0;
    int n_ref = 0;
    Eigen::MatrixXd corrected(w, w);
    for (int a = -half_width; a <= half_width; ++a) {
        for (int b = -half_width; b <= half_width; ++b) {
            const int spread = std::max({a, b, 0}) - std::min({a, b, 0});
            const double c = g.counts(a + half_width, b + half_width) * periods / (periods - spread);
            corrected(a + half_width, b + half_width) = c;
            if (a != 0 && b != 0 && a != b) {
                ref += c;
                ref_raw += g.counts(a + half_width, b + half_width);
                ++n_ref;
            }
        }
    }
    g.reference_mean = ref / n_ref;
    if (!(g.reference_mean > 0.0)) throw NumericalError("no uncorrelated triple coincidences");
    g.normalized = corrected / g.reference_mean;
    const double centre = g.counts(half_width, half_width);
    g.g3_zero = centre / g.reference_mean;
    g.sigma = std::sqrt(centre + (centre == 0.0 ? 1.0 : 0.0)) / g.reference_mean;
    g.sigma = std::hypot(g.sigma, g.g3_zero / std::sqrt(ref_raw));
    return g;
}

TimeGrid tag_grid(const DetectionConfig& cfg, double span) {
    if (!(span > 0.0)) throw ValidationError("span", "must be > 0");
    TimeGrid g;
    g.start = 0.0;
    g.step = cfg.bin_width;
    g.n_points = static_cast<std::size_t>(std::ceil(span / cfg.bin_width));
    return g;
}

CorrelationMap correlation_map_from_tags(const EventStream& stream, const DetectionConfig& cfg, Topology topology,
                                         const TimeGrid& grid, std::uint64_t first_pulse, std::uint64_t n_pulses) {
    if (n_pulses == 0) n_pulses = cfg.n_pulses;
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    CorrelationMap map;
    map.grid = grid;
    map.kind = MapKind::G2;
    map.values = Eigen::MatrixXd::Zero(n, n);
    if (stream.size() == 0 || n_pulses == 0) return map;

    auto cell = [&](double rel) -> Eigen::Index {
        const double x = std::floor((rel - grid.start) / grid.step);
        return x >= 0.0 && x < static_cast<double>(n) ? static_cast<Eigen::Index>(x) : -1;
    };
    const auto t_begin = static_cast<std::uint64_t>(static_cast<double>(first_pulse) * cfg.rep_period);
    const auto t_end = static_cast<std::uint64_t>(static_cast<double>(first_pulse + n_pulses) * cfg.rep_period);
    const auto [i0, i1] = index_range(stream, t_begin, t_end);

    std::size_t g0 = i0;
    while (g0 < i1) {
        const std::int64_t k = pulse_time(cfg, stream.time_ps[g0]).pulse;
        std::size_t g1 = g0 + 1;
        while (g1 < i1 && pulse_time(cfg, stream.time_ps[g1]).pulse == k) ++g1;
        for (std::size_t a = g0; a < g1; ++a) {
            for (std::size_t b = a + 1; b < g1; ++b) {
                if (stream.detector[a] == stream.detector[b]) continue;
                const Eigen::Index ca = cell(pulse_time(cfg, stream.time_ps[a]).rel);
                const Eigen::Index cb = cell(pulse_time(cfg, stream.time_ps[b]).rel);
                if (ca < 0 || cb < 0) continue;
                if (topology == Topology::Hbt3) {
                    map.values(ca, cb) += 1.0;
                    map.values(cb, ca) += 1.0;
                } else if (stream.detector[a] == 0) {
                    map.values(ca, cb) += 1.0;
                } else {
                    map.values(cb, ca) += 1.0;
                }
            }
        }
        g0 = g1;
    }

    const double h2 = grid.step * grid.step;
    const double np = static_cast<double>(n_pulses);
    double scale = 0.0;
    if (topology == Topology::Hbt3) {
        scale = 2.0 * np * pair_weight(cfg, topology) * h2;
    } else {
        // Cross pairs carry a quarter of the HOM map (see generate_events).
        scale = np * cfg.efficiency_of(0) * cfg.efficiency_of(1) * 0.25 * h2;
    }
    if (scale > 0.0) map.values /= scale;
    return map;
}

Eigen::VectorXd intensity_from_tags(const EventStream& stream, const DetectionConfig& cfg, Topology topology,
                                    const TimeGrid& grid, std::uint64_t first_pulse, std::uint64_t n_pulses) {
    if (n_pulses == 0) n_pulses = cfg.n_pulses;
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    const auto t_begin = static_cast<std::uint64_t>(static_cast<double>(first_pulse) * cfg.rep_period);
    const auto t_end = static_cast<std::uint64_t>(static_cast<double>(first_pulse + n_pulses) * cfg.rep_period);
    const auto [i0, i1] = index_range(stream, t_begin, t_end);
    for (std::size_t i = i0; i < i1; ++i) {
        const double x = std::floor((pulse_time(cfg, stream.time_ps[i]).rel - grid.start) / grid.step);
        if (x >= 0.0 && x < static_cast<double>(n)) v(static_cast<Eigen::Index>(x)) += 1.0;
    }
    const int nd = detector_count(topology);
    double eff = 0.0;
    for (int d = 0; d < nd; ++d) eff += cfg.efficiency_of(d) / nd;
    if (n_pulses > 0 && eff > 0.0) v /= static_cast<double>(n_pulses) * eff * grid.step;
    return v;
}

std::vector<MziWindow> analyze_mzi_windows(const EventStream& stream, const DetectionConfig& cfg, int side_peaks) {
    if (stream.n_detectors != 2) throw ValidationError("stream", "interferometer analysis needs two detectors");
    const std::uint64_t ppw = cfg.pulses_per_window();
    std::vector<MziWindow> out;
    for (std::uint64_t k0 = 0; k0 < cfg.n_pulses; k0 += ppw) {
        MziWindow w;
        w.first_pulse = k0;
        w.n_pulses = std::min(ppw, cfg.n_pulses - k0);
        w.phase = mzi_phase(cfg, k0);
        const auto t0 = static_cast<std::uint64_t>(static_cast<double>(k0) * cfg.rep_period);
        const auto t1 = static_cast<std::uint64_t>(static_cast<double>(k0 + w.n_pulses) * cfg.rep_period);
        const auto [i0, i1] = index_range(stream, t0, t1);
        double n_plus = 0.0, n_minus = 0.0;
        for (std::size_t i = i0; i < i1; ++i) (stream.detector[i] == 0 ? n_plus : n_minus) += 1.0;
        if (n_plus + n_minus == 0.0) throw NumericalError("empty acquisition window");
        w.i_sh = (n_plus - n_minus) / (n_plus + n_minus);
        const G2Histogram h = histogram_g2(stream, cfg, side_peaks, t0, t1);
        w.g2_ratio = h.g2_zero;
        w.g2_hom = h.g2_zero * (1.0 - w.i_sh * w.i_sh);
        w.sigma = h.sigma * (1.0 - w.i_sh * w.i_sh);
        out.push_back(w);
    }
    return out;
}

}  // namespace pne
