#include "pne/core/config.hpp"

#include <set>

#include <yaml-cpp/yaml.h>

#include "pne/core/errors.hpp"

namespace pne {

namespace {

const std::set<std::string> kKnownKeys = {"T1",        "tp",          "dt",   "rabi",
                                          "gamma_star", "grid_step",  "jitter_fwhm", "seed",
                                          "background_rate"};

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

template <typename T>
T read_scalar(const YAML::Node& root, const std::string& key, T fallback) {
    const YAML::Node node = root[key];
    if (!node) return fallback;
    if (!node.IsScalar()) throw ParseError("key '" + key + "' must be a scalar", line_of(node));
    try {
        return node.as<T>();
    } catch (const YAML::BadConversion&) {
        throw ParseError("key '" + key + "' has an invalid value", line_of(node));
    }
}

}  // namespace

Config parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ParseError("configuration must be a key-value mapping", line_of(root));

    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (!kKnownKeys.count(key)) throw ParseError("unknown key '" + key + "'", line_of(kv.first));
    }

    Config cfg;
    cfg.t1 = read_scalar<double>(root, "T1", 136.0);
    if (!(cfg.t1 > 0.0) || !std::isfinite(cfg.t1)) {
        throw ValidationError("gamma", "T1 must be positive so that gamma = 1/T1 > 0");
    }
    cfg.atom.gamma = 1.0 / cfg.t1;
    cfg.atom.gamma_star = read_scalar<double>(root, "gamma_star", 0.0);
    cfg.atom.validate();

    auto& seq = cfg.sequence;
    seq.pulse_width = read_scalar<double>(root, "tp", 0.0);
    seq.rabi = read_scalar<double>(root, "rabi", 0.0);
    if (const YAML::Node dt = root["dt"]) {
        if (dt.IsScalar()) {
            seq.separations.push_back(read_scalar<double>(root, "dt", 0.0));
        } else if (dt.IsSequence()) {
            for (const auto& item : dt) {
                try {
                    seq.separations.push_back(item.as<double>());
                } catch (const YAML::BadConversion&) {
                    throw ParseError("key 'dt' must hold numbers", line_of(item));
                }
            }
        } else if (!dt.IsNull()) {
            throw ParseError("key 'dt' must be a list", line_of(dt));
        }
    }
    seq.n_pulses = static_cast<int>(seq.separations.size()) + 1;
    for (double d : seq.separations) {
        if (!(d > seq.pulse_width)) throw ValidationError("dt", "separations must exceed the pulse width");
    }
    seq.validate();

    auto& opt = cfg.options;
    opt.grid_step = read_scalar<double>(root, "grid_step", 1.0);
    opt.jitter_fwhm = read_scalar<double>(root, "jitter_fwhm", 0.0);
    opt.seed = read_scalar<std::uint64_t>(root, "seed", 0);
    opt.background_rate = read_scalar<double>(root, "background_rate", 0.0);
    if (!(opt.grid_step > 0.0) || !std::isfinite(opt.grid_step)) {
        throw ValidationError("grid_step", "must be > 0");
    }
    if (!(opt.jitter_fwhm >= 0.0) || !std::isfinite(opt.jitter_fwhm)) {
        throw ValidationError("jitter_fwhm", "must be >= 0");
    }
    if (!(opt.background_rate >= 0.0) || !std::isfinite(opt.background_rate)) {
        throw ValidationError("background_rate", "must be >= 0");
    }
    return cfg;
}

std::string serialize_config(const Config& config) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "T1" << YAML::Value << config.t1;
    out << YAML::Key << "tp" << YAML::Value << config.sequence.pulse_width;
    out << YAML::Key << "dt" << YAML::Value << YAML::Flow << config.sequence.separations;
    out << YAML::Key << "rabi" << YAML::Value << config.sequence.rabi;
    out << YAML::Key << "gamma_star" << YAML::Value << config.atom.gamma_star;
    out << YAML::Key << "grid_step" << YAML::Value << config.options.grid_step;
    out << YAML::Key << "jitter_fwhm" << YAML::Value << config.options.jitter_fwhm;
    out << YAML::Key << "seed" << YAML::Value << config.options.seed;
    out << YAML::Key << "background_rate" << YAML::Value << config.options.background_rate;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace pne
