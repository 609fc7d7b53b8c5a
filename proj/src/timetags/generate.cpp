#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <istream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "pne/core/errors.hpp"
#include "pne/timetags/timetags.hpp"

namespace pne {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t batch_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(splitmix64(seed ^ splitmix64(a + 1)) + b);
}

struct Click {
    std::uint64_t time;
    std::uint8_t detector;
    bool operator<(const Click& o) const { return time != o.time ? time < o.time : detector < o.detector; }
};

std::uint64_t to_tag(double t) { return t <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(t)); }

void add_background(const DetectionConfig& cfg, int n_det, std::uint64_t pulse, std::mt19937_64& rng,
                    std::vector<Click>& out) {
    if (cfg.background_rate <= 0.0) return;
    std::poisson_distribution<int> count(cfg.background_rate * cfg.rep_period);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int d = 0; d < n_det; ++d) {
        const int k = count(rng);
        for (int i = 0; i < k; ++i) {
            out.push_back({to_tag((static_cast<double>(pulse) + unit(rng)) * cfg.rep_period),
                           static_cast<std::uint8_t>(d)});
        }
    }
}

/// Runs `work(batch_index, clicks)` over batches on cfg.workers threads and concatenates the
/// per-batch sorted results in batch order.
template <typename Work>
void run_batches(std::uint64_t n_batches, unsigned workers, Work work, std::vector<Click>& merged) {
    std::vector<std::vector<Click>> parts(n_batches);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    auto loop = [&] {
        for (std::uint64_t b = next++; b < n_batches; b = next++) {
            try {
                work(b, parts[b]);
                std::sort(parts[b].begin(), parts[b].end());
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!failure) failure = std::current_exception();
                next = n_batches;
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::uint64_t>(1, n_batches))));
    if (n == 1) {
        loop();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n; ++w) pool.emplace_back(loop);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    std::size_t total = merged.size();
    for (const auto& p : parts) total += p.size();
    merged.reserve(total);
    for (auto& p : parts) merged.insert(merged.end(), p.begin(), p.end());
}

/// Per-window categorical tables of the interferometer slot model.
struct MziTables {
    double p_single[2] = {0.0, 0.0};
    double p_cross = 0.0;
    double p_same[2] = {0.0, 0.0};
    std::vector<double> cdf_single[2];
    std::vector<double> cdf_cross, cdf_same;
};

std::vector<double> cdf_of(const Eigen::Ref<const Eigen::VectorXd>& w) {
    std::vector<double> cdf(static_cast<std::size_t>(w.size()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        acc += std::max(0.0, w(i));
        cdf[static_cast<std::size_t>(i)] = acc;
    }
    return cdf;
}

std::size_t pick(const std::vector<double>& cdf, double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

MziTables mzi_tables(const MapSet& maps, double phi, double eta_p, double eta_m) {
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const double h = maps.grid.step;
    const double c1 = std::cos(phi), c2 = std::cos(2.0 * phi);
    const Eigen::Index n = maps.intensity.size();
    Eigen::MatrixXd cm = maps.cminus ? maps.cminus->values : Eigen::MatrixXd::Zero(n, n);

    // Cross pairs (+ at t1, - at t2) and same-detector pairs over the full square, each
    // unordered pair counted once; X + S = (G2 + NN) / 4.
    RowMat x = 0.125 * (maps.nn.values - maps.g1sq.values + maps.g2.values - c2 * maps.c2sq.values + 2.0 * c1 * cm);
    RowMat s = 0.125 * (maps.nn.values + maps.g1sq.values + maps.g2.values + c2 * maps.c2sq.values - 2.0 * c1 * cm);
    x = x.cwiseMax(0.0);
    s = s.cwiseMax(0.0);

    MziTables t;
    t.p_cross = eta_p * eta_m * x.sum() * h * h;
    const double s_total = s.sum() * h * h;
    t.p_same[0] = 0.5 * eta_p * eta_p * s_total;
    t.p_same[1] = 0.5 * eta_m * eta_m * s_total;

    const Eigen::VectorXd coh2 = maps.coherent.cwiseAbs2();
    const Eigen::VectorXd s_marg = 0.5 * (s.rowwise().sum() + s.colwise().sum().transpose()) * h;
    const Eigen::VectorXd single_p = eta_p * 0.5 * (maps.intensity + c1 * coh2) - eta_p * eta_m * x.rowwise().sum() * h -
                                     eta_p * eta_p * s_marg;
    const Eigen::VectorXd single_m = eta_m * 0.5 * (maps.intensity - c1 * coh2) -
                                     eta_p * eta_m * x.colwise().sum().transpose() * h - eta_m * eta_m * s_marg;
    const double neg = (single_p.cwiseMin(0.0).sum() + single_m.cwiseMin(0.0).sum()) * h;
    if (neg < -1e-6) {
        throw ValidationError("efficiency", "too high for the pair-level interferometer generator "
                                            "(implied single-click probability is negative)");
    }
    t.p_single[0] = single_p.cwiseMax(0.0).sum() * h;
    t.p_single[1] = single_m.cwiseMax(0.0).sum() * h;
    const double total = t.p_single[0] + t.p_single[1] + t.p_cross + t.p_same[0] + t.p_same[1];
    if (total > 1.0 + 1e-9) {
        throw ValidationError("efficiency", "slot click probabilities exceed one");
    }
    t.cdf_single[0] = cdf_of(single_p);
    t.cdf_single[1] = cdf_of(single_m);
    t.cdf_cross = cdf_of(Eigen::Map<const Eigen::VectorXd>(x.data(), x.size()));
    t.cdf_same = cdf_of(Eigen::Map<const Eigen::VectorXd>(s.data(), s.size()));
    return t;
}

void put(std::ostream& os, std::uint64_t v, int bytes) {
    char b[8];
    for (int i = 0; i < bytes; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(b, bytes);
}

bool get(std::istream& is, std::uint64_t& v, int bytes) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), bytes)) return false;
    v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return true;
}

}  // namespace

Topology parse_topology(const std::string& name) {
    if (name == "hbt3") return Topology::Hbt3;
    if (name == "mzi") return Topology::Mzi;
    throw ValidationError("topology", "unknown topology '" + name + "' (expected hbt3 or mzi)");
}

std::string to_string(Topology t) { return t == Topology::Hbt3 ? "hbt3" : "mzi"; }

int detector_count(Topology t) { return t == Topology::Hbt3 ? 3 : 2; }

double DetectionConfig::efficiency_of(int detector) const {
    if (efficiency.size() == 1) return efficiency.front();
    return efficiency.at(static_cast<std::size_t>(detector));
}

void DetectionConfig::validate(int n_detectors) const {
    if (efficiency.size() != 1 && efficiency.size() != static_cast<std::size_t>(n_detectors)) {
        throw ValidationError("efficiency", "needs one entry or one per detector");
    }
    for (double e : efficiency) {
        if (!(e >= 0.0 && e <= 1.0)) throw ValidationError("efficiency", "must lie in [0, 1]");
    }
    if (!(bin_width > 0.0)) throw ValidationError("bin_width", "must be > 0");
    if (!(rep_period > 0.0)) throw ValidationError("rep_period", "must be > 0");
    if (!(jitter_fwhm >= 0.0)) throw ValidationError("jitter_fwhm", "must be >= 0");
    if (!(clock_offset >= 0.0 && clock_offset < rep_period)) {
        throw ValidationError("clock_offset", "must lie in [0, rep_period)");
    }
    if (!(background_rate >= 0.0)) throw ValidationError("background_rate", "must be >= 0");
    if (!(acquisition_window > 0.0)) throw ValidationError("acquisition_window", "must be > 0");
    if (batch_size < 1) throw ValidationError("batch_size", "must be >= 1");
}

std::uint64_t DetectionConfig::pulses_per_window() const {
    const double n = std::floor(acquisition_window * 1e12 / rep_period);
    return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

double mzi_phase(const DetectionConfig& cfg, std::uint64_t pulse) {
    const std::uint64_t ppw = cfg.pulses_per_window();
    const double window_start = static_cast<double>(pulse / ppw * ppw) * cfg.rep_period * 1e-12;
    return cfg.phase0 + cfg.phase_drift_rate * window_start;
}

void EventStream::validate() const {
    if (detector.size() != time_ps.size()) throw ValidationError("events", "column lengths differ");
    for (std::size_t i = 0; i < time_ps.size(); ++i) {
        if (detector[i] >= n_detectors) throw ValidationError("events", "detector id out of range");
        if (i > 0 && time_ps[i] < time_ps[i - 1]) throw ValidationError("events", "times must be non-decreasing");
    }
}

EventStream generate_events(const SourceModel& source, Topology topology, const DetectionConfig& cfg) {
    const int n_det = detector_count(topology);
    cfg.validate(n_det);
    const double sigma = cfg.jitter_fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    std::vector<Click> clicks;

    if (topology == Topology::Hbt3) {
        if (!source.emission) throw ValidationError("source", "hbt3 needs an emission model");
        const EmissionModel& em = *source.emission;
        const std::uint64_t n_batches = (cfg.n_pulses + cfg.batch_size - 1) / cfg.batch_size;
        run_batches(n_batches, cfg.workers, [&](std::uint64_t b, std::vector<Click>& out) {
            std::mt19937_64 rng(batch_seed(cfg.seed, 0, b));
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            std::normal_distribution<double> gauss(0.0, 1.0);
            std::vector<double> times;
            const std::uint64_t k_end = std::min(cfg.n_pulses, (b + 1) * cfg.batch_size);
            for (std::uint64_t k = b * cfg.batch_size; k < k_end; ++k) {
                times.clear();
                em.sample(rng, times);
                const double clock = static_cast<double>(k) * cfg.rep_period + cfg.clock_offset;
                for (double t : times) {
                    const int d = std::min(2, static_cast<int>(3.0 * unit(rng)));
                    if (unit(rng) >= cfg.efficiency_of(d)) continue;
                    const double jit = sigma > 0.0 ? sigma * gauss(rng) : 0.0;
                    out.push_back({to_tag(clock + t + jit), static_cast<std::uint8_t>(d)});
                }
                add_background(cfg, n_det, k, rng, out);
            }
        }, clicks);
    } else {
        if (!source.maps) throw ValidationError("source", "mzi needs deterministic correlation maps");
        const MapSet& maps = *source.maps;
        const double eta_p = cfg.efficiency_of(0), eta_m = cfg.efficiency_of(1);
        const std::uint64_t ppw = cfg.pulses_per_window();
        const std::uint64_t n_windows = (cfg.n_pulses + ppw - 1) / ppw;
        const TimeGrid& grid = maps.grid;
        for (std::uint64_t w = 0; w < n_windows; ++w) {
            const std::uint64_t w_begin = w * ppw, w_end = std::min(cfg.n_pulses, w_begin + ppw);
            const MziTables tab = mzi_tables(maps, mzi_phase(cfg, w_begin), eta_p, eta_m);
            const std::uint64_t n_batches = (w_end - w_begin + cfg.batch_size - 1) / cfg.batch_size;
            run_batches(n_batches, cfg.workers, [&](std::uint64_t b, std::vector<Click>& out) {
                std::mt19937_64 rng(batch_seed(cfg.seed, w + 1, b));
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                std::normal_distribution<double> gauss(0.0, 1.0);
                const std::size_t n = grid.n_points;
                auto cell_time = [&](std::size_t i) { return grid.edge(i) + grid.step * unit(rng); };
                const std::uint64_t k0 = w_begin + b * cfg.batch_size;
                const std::uint64_t k1 = std::min(w_end, k0 + cfg.batch_size);
                for (std::uint64_t k = k0; k < k1; ++k) {
                    const double clock = static_cast<double>(k) * cfg.rep_period + cfg.clock_offset;
                    auto emit = [&](double t, int d) {
                        const double jit = sigma > 0.0 ? sigma * gauss(rng) : 0.0;
                        out.push_back({to_tag(clock + t + jit), static_cast<std::uint8_t>(d)});
                    };
                    double u = unit(rng);
                    if ((u -= tab.p_single[0]) < 0.0) {
                        emit(cell_time(pick(tab.cdf_single[0], unit(rng))), 0);
                    } else if ((u -= tab.p_single[1]) < 0.0) {
                        emit(cell_time(pick(tab.cdf_single[1], unit(rng))), 1);
                    } else if ((u -= tab.p_cross) < 0.0) {
                        const std::size_t idx = pick(tab.cdf_cross, unit(rng));
                        emit(cell_time(idx / n), 0);
                        emit(cell_time(idx % n), 1);
                    } else if ((u -= tab.p_same[0]) < 0.0) {
                        const std::size_t idx = pick(tab.cdf_same, unit(rng));
                        emit(cell_time(idx / n), 0);
                        emit(cell_time(idx % n), 0);
                    } else if ((u -= tab.p_same[1]) < 0.0) {
                        const std::size_t idx = pick(tab.cdf_same, unit(rng));
                        emit(cell_time(idx / n), 1);
                        emit(cell_time(idx % n), 1);
                    }
                    add_background(cfg, n_det, k, rng, out);
                }
            }, clicks);
        }
    }

    // Jitter can reorder clicks across a batch boundary only in pathological settings.
    if (!std::is_sorted(clicks.begin(), clicks.end())) std::stable_sort(clicks.begin(), clicks.end());
    EventStream s;
    s.n_detectors = static_cast<std::uint8_t>(n_det);
    s.time_ps.reserve(clicks.size());
    s.detector.reserve(clicks.size());
    for (const Click& c : clicks) {
        s.time_ps.push_back(c.time);
        s.detector.push_back(c.detector);
    }
    return s;
}

void write_ttag(std::ostream& os, const EventStream& stream) {
    os.write("TTAG", 4);
    put(os, 1, 2);
    put(os, stream.n_detectors, 1);
    put(os, 1, 4);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        put(os, stream.detector[i], 1);
        put(os, stream.time_ps[i], 8);
    }
}

EventStream read_ttag(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "TTAG", 4) != 0) throw ParseError("not a TTAG stream", 0);
    std::uint64_t version = 0, n_det = 0, resolution = 0;
    if (!get(is, version, 2) || !get(is, n_det, 1) || !get(is, resolution, 4)) {
        throw ParseError("truncated TTAG header", 0);
    }
    if (version != 1) throw ParseError("unsupported TTAG version " + std::to_string(version), 0);
    if (resolution != 1) throw ParseError("only 1 ps TTAG resolution is supported", 0);
    EventStream s;
    s.n_detectors = static_cast<std::uint8_t>(n_det);
    std::uint64_t d = 0, t = 0;
    while (get(is, d, 1)) {
        if (!get(is, t, 8)) throw ParseError("truncated TTAG record", 0);
        s.detector.push_back(static_cast<std::uint8_t>(d));
        s.time_ps.push_back(t);
    }
    s.validate();
    return s;
}

}  // namespace pne
