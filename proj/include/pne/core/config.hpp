#pragma once

#include <cstdint>
#include <string>

#include "pne/core/types.hpp"

namespace pne {

struct SimulationOptions {
    double grid_step = 1.0;        ///< ps
    double jitter_fwhm = 0.0;      ///< ps
    std::uint64_t seed = 0;
    double background_rate = 0.0;  ///< flat background clicks per detector per ps

    bool operator==(const SimulationOptions&) const = default;
};

/// Parsed configuration. `t1` is kept verbatim so that serialization round-trips exactly.
struct Config {
    double t1 = 136.0;
    AtomParams atom;
    PulseSequence sequence;
    SimulationOptions options;

    bool operator==(const Config&) const = default;
};

/// Flat keys: T1, tp, dt (chronological list of start-to-start separations), rabi, gamma_star,
/// grid_step, jitter_fwhm, seed, background_rate. JSON documents are accepted as a YAML subset.
/// Defaults: T1 = 136, tp = 0, dt = [], rabi = pi/tp (0 when tp = 0), gamma_star = 0,
/// grid_step = 1, jitter_fwhm = 0, seed = 0, background_rate = 0.
/// Throws ParseError on malformed text and ValidationError naming the field otherwise.
Config parse_config(const std::string& text);

/// Emits every key with round-trip precision.
std::string serialize_config(const Config& config);

}  // namespace pne
