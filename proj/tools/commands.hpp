#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pne/core/config.hpp"

namespace pne::cli {

/// Options shared by every subcommand. Unset overrides leave the config file value alone.
struct CommonOptions {
    std::string config_path;
    std::optional<int> n_pulses;
    std::vector<double> dt;
    std::optional<double> tp, t1, gamma_star, jitter;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::string run_id;
};

/// Config file (or defaults) with overrides applied. A missing dt list becomes T1 ln 2 between
/// every pair of pulses and a single dt is repeated.
Config resolve_config(const CommonOptions& opt);

struct SequenceOptions {
    bool golden = false;
};

struct CorrelateOptions {
    std::string source = "model";  ///< ideal | model
    std::size_t stride = 4;
    std::size_t sweep_points = 200;
    std::optional<double> threshold;  ///< quadrant split reported in summary.json
};

struct EstimateOptions {
    std::string inputs_path;
    std::optional<std::uint64_t> n_samples;
    std::optional<unsigned> workers;
};

struct TimetagsOptions {
    std::string topology = "hbt3";
    std::string source = "model";  ///< ideal | model | coherent | single
    std::uint64_t pulses = 100000;
    std::vector<double> efficiency{1.0};
    double rep_period = 12300.0;
    double bin_width = 8.0;
    double window = 0.1;           ///< s
    std::optional<double> phase_drift;
    double coherent_mu = 0.5;
    int side_peaks = 10;
    unsigned workers = 1;
    std::size_t stride = 4;
};

int cmd_sequence(const CommonOptions& common, const SequenceOptions& opt);
int cmd_correlate(const CommonOptions& common, const CorrelateOptions& opt);
int cmd_estimate(const CommonOptions& common, const EstimateOptions& opt);
int cmd_timetags(const CommonOptions& common, const TimetagsOptions& opt);

}  // namespace pne::cli
