#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace pne {

// Units: picoseconds for times, 1/ps for rates. Rotating frame throughout; the carrier
// frequency is carried as metadata only.

struct AtomParams {
    double gamma = 1.0 / 136.0;  ///< decay rate 1/T1
    double gamma_star = 0.0;     ///< pure-dephasing rate
    double omega0 = 0.0;         ///< optical carrier (metadata)

    static AtomParams from_lifetime(double t1, double gamma_star = 0.0);
    double lifetime() const { return 1.0 / gamma; }
    double half_life() const;
    void validate() const;

    bool operator==(const AtomParams&) const = default;
};

/// Square pi-pulse schedule. Separations are stored chronologically: separations[j] is the
/// start-to-start delay between pulse j and pulse j+1, so there are n_pulses-1 of them. The
/// period after the final pulse is implicit and unbounded.
struct PulseSequence {
    int n_pulses = 1;
    std::vector<double> separations;
    double pulse_width = 0.0;  ///< t_p
    double rabi = 0.0;         ///< Omega; 0 means "pi/t_p" when t_p > 0

    /// Delta t_m with m counted from the end of the sequence (m = 2..n_pulses).
    double separation_from_end(int m) const;
    std::vector<double> pulse_starts() const;
    double effective_rabi() const;
    double total_separation() const;
    void validate() const;

    bool operator==(const PulseSequence&) const = default;
};

/// Uniform time grid made of cells [start + i*step, start + (i+1)*step). Sampled quantities
/// live at the cell centres and integrals are cell sums.
struct TimeGrid {
    double start = 0.0;
    double step = 1.0;
    std::size_t n_points = 2;

    double edge(std::size_t i) const { return start + step * static_cast<double>(i); }
    double center(std::size_t i) const { return start + step * (static_cast<double>(i) + 0.5); }
    double end() const { return edge(n_points); }
    Eigen::VectorXd centers() const;
    void validate() const;

    bool operator==(const TimeGrid&) const = default;
};

/// Default grid for a sequence: span [0, 10*T1 + sum of separations], step at most `step_hint`,
/// shrunk so that pulse edges fall on cell boundaries whenever the schedule allows it.
TimeGrid default_grid(const AtomParams& atom, const PulseSequence& seq, double step_hint = 1.0);

/// Thresholds T_[m] splitting a wavepacket into consecutive time bins.
struct TimeBinPartition {
    std::vector<double> thresholds;
    void validate(const TimeGrid* grid = nullptr) const;
};

}  // namespace pne
