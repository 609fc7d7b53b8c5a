#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pne/correlations/maps.hpp"
#include "pne/dynamics/field_state.hpp"

namespace pne {

enum class Topology { Hbt3, Mzi };

/// "hbt3" or "mzi"; anything else throws ValidationError("topology").
Topology parse_topology(const std::string& name);
std::string to_string(Topology t);
int detector_count(Topology t);

struct DetectionConfig {
    /// One entry per detector, or a single entry applied to all of them.
    std::vector<double> efficiency{1.0};
    double jitter_fwhm = 0.0;      ///< ps
    double bin_width = 8.0;        ///< ps
    double rep_period = 12300.0;   ///< ps
    std::uint64_t n_pulses = 100000;
    std::uint64_t seed = 0;
    double clock_offset = 1000.0;  ///< ps between a period boundary and its excitation pulse
    double background_rate = 0.0;  ///< flat clicks per detector per ps
    double phase0 = 0.0;           ///< MZI phase at t = 0
    double phase_drift_rate = 0.6283185307179586;  ///< rad per second of wall clock (pi per 5 s)
    double acquisition_window = 0.1;               ///< s; the MZI phase is held constant inside
    std::uint64_t batch_size = 65536;              ///< pulses per seeded batch
    unsigned workers = 1;

    double efficiency_of(int detector) const;
    void validate(int n_detectors) const;
    /// Pulses per acquisition window (at least 1).
    std::uint64_t pulses_per_window() const;
};

/// Time-sorted click records. Times are absolute picoseconds; pulse k fires at
/// k * rep_period + clock_offset.
struct EventStream {
    std::uint8_t n_detectors = 0;
    std::vector<std::uint8_t> detector;
    std::vector<std::uint64_t> time_ps;

    std::size_t size() const { return time_ps.size(); }
    /// Non-decreasing times and valid detector ids.
    void validate() const;
    bool operator==(const EventStream&) const = default;
};

/// Photon emission of one excitation: appends emission times (ps after the pulse clock).
class EmissionModel {
public:
    virtual ~EmissionModel() = default;
    virtual void sample(std::mt19937_64& rng, std::vector<double>& times) const = 0;
    /// p0..p3 of the sampled photon-number distribution.
    virtual std::array<double, 4> number_probabilities() const = 0;
};

/// Samples a truncated field state: photon number from (p0, p1, p2, deficit), one-photon time
/// from |psi1|^2, the pair from |phi|^2, uniformly inside grid cells. A positive deficit is
/// drawn as three photons with independent times from the intensity profile.
class FieldStateEmission final : public EmissionModel {
public:
    explicit FieldStateEmission(const FieldState& field);
    void sample(std::mt19937_64& rng, std::vector<double>& times) const override;
    std::array<double, 4> number_probabilities() const override { return p_; }

private:
    TimeGrid grid_;
    std::array<double, 4> p_{};
    std::vector<double> cdf1_, cdf2_, cdf_intensity_;
};

/// Photon number from `pn` (n = 0..pn.size()-1), independent exponential emission times.
class IndependentEmission final : public EmissionModel {
public:
    IndependentEmission(std::vector<double> pn, double gamma);
    static IndependentEmission coherent(double mu, double gamma);
    static IndependentEmission single_photon(double gamma);
    void sample(std::mt19937_64& rng, std::vector<double>& times) const override;
    std::array<double, 4> number_probabilities() const override;

private:
    std::vector<double> cdf_;
    std::vector<double> pn_;
    double gamma_;
};

/// `emission` drives hbt3; `maps` (deterministic correlation maps, with C-) drive mzi.
struct SourceModel {
    std::shared_ptr<const EmissionModel> emission;
    std::optional<MapSet> maps;

    static SourceModel from_field(const FieldState& field, double gamma_star, bool with_mzi_maps);
};

/// hbt3: each photon picks one of three detectors with probability 1/3, survives with the
/// detector efficiency, and is tagged with Gaussian jitter. mzi: per time slot a categorical
/// outcome (nothing, one click on +/-, a cross pair, a same-detector pair) is drawn from the
/// phase-dependent pair statistics at the current interferometer phase, which is held
/// constant within each acquisition window and drifts linearly between windows. The mzi
/// generator is exact up to second factorial moments and refuses efficiencies for which the
/// implied single-click probability would be negative.
EventStream generate_events(const SourceModel& source, Topology topology, const DetectionConfig& cfg);

/// MZI phase used for pulse k.
double mzi_phase(const DetectionConfig& cfg, std::uint64_t pulse);

struct G2Histogram {
    double g2_zero = 0.0;
    double sigma = 0.0;
    double side_mean = 0.0;
    std::vector<int> peak_index;          ///< m in [-(side+1), side+1]
    std::vector<double> peak_counts;      ///< coincidences per rep-period peak
    std::vector<double> tau;              ///< fine bin centres, ps
    std::vector<std::uint64_t> fine_counts;
};

/// Cross-detector coincidences of events in [t_begin, t_end), binned at cfg.bin_width and
/// grouped per rep-period peak. g2(0) is the zero peak over the mean of the side peaks
/// 2 <= |m| <= side_peaks + 1 (the +-1 peaks are skipped: in the interferometer they carry
/// correlations between consecutive slots). Requires >= 100 periods and side_peaks >= 10.
G2Histogram histogram_g2(const EventStream& stream, const DetectionConfig& cfg, int side_peaks = 10,
                         std::uint64_t t_begin = 0, std::uint64_t t_end = UINT64_MAX);

struct G3Histogram {
    double g3_zero = 0.0;
    double sigma = 0.0;
    double reference_mean = 0.0;
    int half_width = 0;                   ///< squares span m in [-half_width, half_width]
    Eigen::MatrixXd counts;               ///< (m1 + half_width, m2 + half_width)
    Eigen::MatrixXd normalized;
};

/// Triple coincidences on detectors (0, 1, 2) in square windows of side `square` ps centred on
/// (m1, m2) * rep_period. The centre square is normalised by the mean of the squares with
/// m1, m2 != 0 and m1 != m2 (all three clicks from different pulses).
G3Histogram histogram_g3(const EventStream& stream, const DetectionConfig& cfg, int half_width = 4,
                         double square = 5000.0);

/// Grid for maps relative to the pulse clock: start 0, step bin_width, `span` ps long.
TimeGrid tag_grid(const DetectionConfig& cfg, double span);

/// Two-time coincidence map of zero-peak cross-detector pairs with pulse index in
/// [first_pulse, first_pulse + n_pulses), scaled to estimate G2 (hbt3) or the HOM map (mzi,
/// + click on t1, - click on t2). An empty stream yields an all-zero map.
CorrelationMap correlation_map_from_tags(const EventStream& stream, const DetectionConfig& cfg, Topology topology,
                                         const TimeGrid& grid, std::uint64_t first_pulse = 0,
                                         std::uint64_t n_pulses = 0);

/// Single-click intensity N(t) estimated on `grid` over the same pulse range.
Eigen::VectorXd intensity_from_tags(const EventStream& stream, const DetectionConfig& cfg, Topology topology,
                                    const TimeGrid& grid, std::uint64_t first_pulse = 0, std::uint64_t n_pulses = 0);

/// Per-window self-homodyne signal and HOM correlation of an mzi stream.
struct MziWindow {
    std::uint64_t first_pulse = 0, n_pulses = 0;
    double phase = 0.0;        ///< generator phase (known only in simulation)
    double i_sh = 0.0;         ///< (n+ - n-) / (n+ + n-)
    double g2_ratio = 0.0;     ///< zero peak / side peaks
    double g2_hom = 0.0;       ///< g2_ratio * (1 - I_SH^2), normalised by mu^2
    double sigma = 0.0;
};

std::vector<MziWindow> analyze_mzi_windows(const EventStream& stream, const DetectionConfig& cfg,
                                           int side_peaks = 10);

/// Little-endian: "TTAG", u16 version (1), u8 n_detectors, u32 resolution in ps (1), then
/// {u8 detector, u64 time_ps} per record.
void write_ttag(std::ostream& os, const EventStream& stream);
EventStream read_ttag(std::istream& is);

}  // namespace pne
