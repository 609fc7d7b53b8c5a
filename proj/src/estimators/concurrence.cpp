#include "pne/estimators/concurrence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <mutex>
#include <thread>
#include <vector>

namespace pne {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

Eigen::Matrix4cd draw(const PartialDensityMatrix& pdm, std::mt19937_64& rng, bool noise) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto measured = [&](const DmElement& e) { return noise && e.sigma > 0.0 ? e.value + e.sigma * normal(rng) : e.value; };

    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int i = 0; i < 4; ++i) {
        const DmElement& e = pdm.at(i, i);
        rho(i, i) = e.status == ElementStatus::Measured ? measured(e) : e.upper * unit(rng);
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            const DmElement& e = pdm.at(i, j);
            std::complex<double> v;
            if (e.status == ElementStatus::Measured) {
                v = measured(e);
            } else {
                const double cap = std::sqrt(std::max(0.0, rho(i, i).real()) * std::max(0.0, rho(j, j).real()));
                const double mag = cap * unit(rng);
                v = std::polar(mag, 2.0 * std::numbers::pi * unit(rng));
            }
            rho(i, j) = v;
            rho(j, i) = std::conj(v);
        }
    }
    return rho;
}

struct ChunkResult {
    std::uint64_t accepted = 0, rejected = 0;
    double mean = 0.0, m2 = 0.0, norm_sum = 0.0;
    std::array<std::uint64_t, 64> histogram{};
};

constexpr std::uint64_t kDiagnosticAttempts = 10000000;

ChunkResult run_chunk(const PartialDensityMatrix& pdm, std::uint64_t seed, std::uint64_t quota, bool noise) {
    std::mt19937_64 rng(seed);
    ChunkResult r;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es;
    Eigen::LLT<Eigen::Matrix4cd> llt;
    while (r.accepted < quota) {
        const Eigen::Matrix4cd rho = draw(pdm, rng, noise);
        // Cheap Cholesky screen; only draws that pass it pay for the eigensolver.
        llt.compute(rho + 2e-10 * Eigen::Matrix4cd::Identity());
        bool physical = llt.info() == Eigen::Success;
        if (physical) {
            es.compute(rho);
            physical = es.eigenvalues().minCoeff() >= -1e-10;
        }
        if (!physical) {
            ++r.rejected;
            const std::uint64_t attempts = r.accepted + r.rejected;
            if (attempts >= kDiagnosticAttempts &&
                static_cast<double>(r.accepted) < 1e-4 * static_cast<double>(attempts)) {
                throw NumericalError("concurrence sampler accepted " + std::to_string(r.accepted) + " of " +
                                     std::to_string(attempts) +
                                     " draws; the partial density matrix is (nearly) never positive semidefinite");
            }
            continue;
        }
        const double c = detail::concurrence_from_eigen<double>(es.eigenvectors(), es.eigenvalues());
        ++r.accepted;
        const double delta = c - r.mean;
        r.mean += delta / static_cast<double>(r.accepted);
        r.m2 += delta * (c - r.mean);
        const double tr = rho.trace().real();
        r.norm_sum += tr > 0.0 ? c / tr : 0.0;
        const auto bin = static_cast<std::size_t>(std::clamp(c, 0.0, 1.0) * 64.0);
        ++r.histogram[std::min<std::size_t>(bin, 63)];
    }
    return r;
}

}  // namespace

double ConcurrenceEstimate::acceptance_rate() const {
    const double total = static_cast<double>(n_accepted + n_rejected);
    return total > 0.0 ? static_cast<double>(n_accepted) / total : 0.0;
}

Eigen::Matrix4cd draw_density_matrix(const PartialDensityMatrix& pdm, std::uint64_t seed, bool noise) {
    std::mt19937_64 rng(splitmix64(seed));
    return draw(pdm, rng, noise);
}

ConcurrenceEstimate sample_concurrence(const PartialDensityMatrix& pdm, const SamplerOptions& opt) {
    if (opt.n_samples < 1) throw ValidationError("n_samples", "must be >= 1");
    if (opt.chunk_size < 1) throw ValidationError("chunk_size", "must be >= 1");
    const std::uint64_t n_chunks = (opt.n_samples + opt.chunk_size - 1) / opt.chunk_size;
    std::vector<ChunkResult> chunks(n_chunks);

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::uint64_t k = next++; k < n_chunks; k = next++) {
            const std::uint64_t quota = std::min(opt.chunk_size, opt.n_samples - k * opt.chunk_size);
            try {
                chunks[k] = run_chunk(pdm, splitmix64(opt.seed + 0x632BE59BD9B4E019ull * (k + 1)), quota,
                                      opt.include_measurement_noise);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n_chunks;
            }
        }
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(opt.workers, static_cast<unsigned>(n_chunks)));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    // Merge in chunk order so the result does not depend on scheduling.
    ConcurrenceEstimate est;
    double mean = 0.0, m2 = 0.0, norm_sum = 0.0;
    std::uint64_t n = 0;
    for (const ChunkResult& c : chunks) {
        if (c.accepted == 0) continue;
        const double na = static_cast<double>(n), nb = static_cast<double>(c.accepted);
        const double delta = c.mean - mean;
        mean += delta * nb / (na + nb);
        m2 += c.m2 + delta * delta * na * nb / (na + nb);
        n += c.accepted;
        norm_sum += c.norm_sum;
        est.n_rejected += c.rejected;
        for (std::size_t b = 0; b < 64; ++b) est.histogram[b] += c.histogram[b];
    }
    est.n_accepted = n;
    est.mean = mean;
    est.std = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
    est.normalized_mean = norm_sum / static_cast<double>(n);
    return est;
}

}  // namespace pne
