#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "manifest.hpp"
#include "pne/core/errors.hpp"
#include "pne/correlations/maps.hpp"
#include "pne/correlations/quadrant.hpp"
#include "pne/correlations/hom.hpp"
#include "pne/dynamics/dynamics.hpp"
#include "pne/estimators/report.hpp"
#include "pne/mps/mps.hpp"
#include "pne/timetags/timetags.hpp"

namespace pne::cli {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("config", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t effective_seed(const Config& c) { return c.options.seed; }

std::string run_id_for(const CommonOptions& opt, std::uint64_t seed) {
    return opt.run_id.empty() ? default_run_id(seed) : opt.run_id;
}

PulseSequence without_width(PulseSequence seq) {
    seq.pulse_width = 0.0;
    seq.rabi = 0.0;
    return seq;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json quadrant_json(const QuadrantValues& q) {
    return {{"ee", optional_json(q[0][0])}, {"el", optional_json(q[0][1])},
            {"le", optional_json(q[1][0])}, {"ll", optional_json(q[1][1])}};
}

json quadrant_summary_json(const QuadrantSummary& s) {
    return {{"T", s.threshold},         {"mu", s.mu},
            {"mu_bar_e", s.mu_bar[0]},  {"mu_bar_l", s.mu_bar[1]},
            {"g2", quadrant_json(s.g2)}, {"M", quadrant_json(s.M)},
            {"c2", quadrant_json(s.c2)}, {"g2_total", s.g2_total},
            {"M_total", s.M_total},     {"c2_total", s.c2_total},
            {"c1", s.c1}};
}

void csv_optional(std::ostream& os, const std::optional<double>& v) {
    os << ',';
    if (v) os << *v;
}

FieldState field_for(const Config& config, const std::string& source, const TimeGrid& grid) {
    if (config.sequence.n_pulses < 1) throw ValidationError("N", "the source needs at least one pulse");
    if (source == "ideal") {
        const PulseSequence seq = without_width(config.sequence);
        return ideal_field_state(build_state(config.atom, seq), config.atom, seq, grid);
    }
    if (source == "model") return simulate_field(config.atom, config.sequence, grid);
    throw ValidationError("source", "expected ideal or model, got '" + source + "'");
}

std::string csv_of_map(const CorrelationMap& map, std::size_t stride) {
    std::ostringstream os;
    write_map_csv(os, map, stride);
    return os.str();
}

/// Bisects for mu_bar_e = mu_bar_l inside a bracketing interval.
double balance_threshold(const MapSet& maps, double lo, double hi) {
    for (int it = 0; it < 60 && hi - lo > 1e-9 * maps.grid.step; ++it) {
        const double mid = 0.5 * (lo + hi);
        const QuadrantSummary q = quadrant_reduce(maps, mid);
        (q.mu_bar[0] < q.mu_bar[1] ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

Config resolve_config(const CommonOptions& opt) {
    Config c = opt.config_path.empty() ? parse_config("{}") : parse_config(read_file(opt.config_path));
    if (opt.t1) {
        c.t1 = *opt.t1;
        c.atom.gamma = 1.0 / *opt.t1;
    }
    if (opt.gamma_star) c.atom.gamma_star = *opt.gamma_star;
    if (opt.tp) {
        c.sequence.pulse_width = *opt.tp;
        c.sequence.rabi = 0.0;  // pi / tp
    }
    if (opt.jitter) c.options.jitter_fwhm = *opt.jitter;
    if (opt.seed) c.options.seed = *opt.seed;

    if (opt.n_pulses) {
        const int n = *opt.n_pulses;
        if (n < 0) throw ValidationError("N", "must be >= 0");
        c.sequence.n_pulses = n;
        const auto gaps = static_cast<std::size_t>(std::max(n - 1, 0));
        std::vector<double> dt = opt.dt.empty() ? c.sequence.separations : opt.dt;
        if (dt.size() != gaps) {
            if (dt.size() == 1) {
                dt.assign(gaps, dt.front());
            } else if (opt.dt.empty()) {
                dt.assign(gaps, c.t1 * std::log(2.0));
            } else {
                throw ValidationError("dt", "expected a single value or N - 1 = " + std::to_string(gaps) + " values");
            }
        }
        c.sequence.separations = dt;
    } else if (!opt.dt.empty()) {
        c.sequence.separations = opt.dt;
        c.sequence.n_pulses = static_cast<int>(opt.dt.size()) + 1;
    }
    c.atom.validate();
    c.sequence.validate();
    return c;
}

int cmd_sequence(const CommonOptions& common, const SequenceOptions& opt) {
    Config config = resolve_config(common);
    RunManifest man("sequence", common.out, run_id_for(common, effective_seed(config)), effective_seed(config));

    std::optional<GoldenSchedule> golden;
    if (opt.golden) {
        golden = golden_schedule(config.sequence.n_pulses, config.t1);
        const double tp = config.sequence.pulse_width;
        config.sequence = golden->sequence();
        config.sequence.pulse_width = tp;
    }
    if (config.sequence.n_pulses == 0) man.warn("N = 0 yields the vacuum state");
    if (config.sequence.pulse_width > 0.0) {
        man.warn("the ideal state ignores the pulse width (tp = " + std::to_string(config.sequence.pulse_width) + " ps)");
    }
    man.set_config(serialize_config(config));
    man.set_field("n_pulses", config.sequence.n_pulses);

    const PhotonicState state = build_state(config.atom, without_width(config.sequence));
    man.write_artifact("state.json", state_to_json(state) + "\n");

    std::ostringstream table;
    table.precision(17);
    table << "bits,re,im,probability\n";
    for (const auto& [bits, a] : state.amplitudes()) {
        table << (bits.empty() ? "-" : bits) << ',' << a.real() << ',' << a.imag() << ',' << std::norm(a) << '\n';
    }
    man.write_artifact("amplitudes.csv", table.str());

    json summary{{"n_pulses", config.sequence.n_pulses},
                 {"separations", config.sequence.separations},
                 {"terms", state.size()},
                 {"norm", state.norm_squared()}};
    if (golden) {
        json g;
        g["separations"] = golden->separations;
        g["fibonacci"] = golden->fib;
        summary["golden"] = g;
    }
    man.write_artifact("summary.json", summary.dump(2) + "\n");
    man.finish();
    std::cout << man.dir().string() << "\n";
    return 0;
}

int cmd_correlate(const CommonOptions& common, const CorrelateOptions& opt) {
    const Config config = resolve_config(common);
    RunManifest man("correlate", common.out, run_id_for(common, effective_seed(config)), effective_seed(config));
    man.set_config(serialize_config(config));
    man.set_field("n_pulses", config.sequence.n_pulses);
    man.set_field("source", opt.source);
    if (opt.stride == 0) throw ValidationError("stride", "must be >= 1");
    if (opt.sweep_points < 2) throw ValidationError("sweep-points", "must be >= 2");

    const PulseSequence grid_seq = opt.source == "ideal" ? without_width(config.sequence) : config.sequence;
    const TimeGrid grid = default_grid(config.atom, grid_seq, config.options.grid_step);
    const FieldState field = field_for(config, opt.source, grid);
    if (field.deficit > 1e-3) {
        man.warn("probability outside the two-photon truncation: " + std::to_string(field.deficit));
    }
    const MapSet maps = apply_jitter(build_maps(field, config.atom.gamma_star), config.options.jitter_fwhm);

    man.write_artifact("map_nn.csv", csv_of_map(maps.nn, opt.stride));
    man.write_artifact("map_g2.csv", csv_of_map(maps.g2, opt.stride));
    man.write_artifact("map_g1sq.csv", csv_of_map(maps.g1sq, opt.stride));
    man.write_artifact("map_c2sq.csv", csv_of_map(maps.c2sq, opt.stride));
    {
        std::ostringstream os;
        os.precision(17);
        os << "t,intensity\n";
        for (std::size_t i = 0; i < grid.n_points; ++i) os << grid.center(i) << ',' << maps.intensity(static_cast<Eigen::Index>(i)) << '\n';
        man.write_artifact("intensity.csv", os.str());
    }
    if (field.p1() > 0.0) {
        std::ostringstream os;
        write_wavefunction_csv(os, grid, field.psi1 / std::sqrt(field.p1()));
        man.write_artifact("single_photon.csv", os.str());
    }

    // Sweep T across the emitted wavepacket, from the first cell to three lifetimes after
    // the last pulse.
    const auto starts = config.sequence.pulse_starts();
    const double last = starts.empty() ? 0.0 : starts.back();
    const double hi = std::min(grid.end() - grid.step, last + config.sequence.pulse_width + 3.0 * config.t1);
    const double lo = grid.start + grid.step;
    std::ostringstream sweep;
    sweep.precision(12);
    sweep << "T,mu_bar_e,mu_bar_l,g2_ee,g2_el,g2_ll,M_ee,M_el,M_ll,c2_ee,c2_el,c2_ll\n";
    std::optional<double> balanced;
    double prev_T = 0.0, prev_diff = 0.0;
    for (std::size_t k = 0; k < opt.sweep_points; ++k) {
        const double T = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(opt.sweep_points - 1);
        const QuadrantSummary q = quadrant_reduce(maps, T);
        sweep << T << ',' << q.mu_bar[0] << ',' << q.mu_bar[1];
        for (const QuadrantValues* v : {&q.g2, &q.M, &q.c2}) {
            csv_optional(sweep, (*v)[0][0]);
            csv_optional(sweep, (*v)[0][1]);
            csv_optional(sweep, (*v)[1][1]);
        }
        sweep << '\n';
        const double diff = q.mu_bar[0] - q.mu_bar[1];
        if (k > 0 && !balanced && prev_diff < 0.0 && diff >= 0.0) {
            balanced = balance_threshold(maps, prev_T, T);
        }
        prev_T = T;
        prev_diff = diff;
    }
    man.write_artifact("sweep.csv", sweep.str());

    json summary{{"source", opt.source},
                 {"grid", {{"start", grid.start}, {"step", grid.step}, {"n_points", grid.n_points}}},
                 {"p0", field.p0()},
                 {"p1", field.p1()},
                 {"p2", field.p2()},
                 {"deficit", field.deficit},
                 {"mu", maps.mu()},
                 {"c1", maps.c1()},
                 {"balanced_threshold", optional_json(balanced)}};
    const std::optional<double> report_T = opt.threshold ? opt.threshold : balanced;
    if (report_T) summary["quadrants"] = quadrant_summary_json(quadrant_reduce(maps, *report_T));
    man.write_artifact("summary.json", summary.dump(2) + "\n");
    man.finish();
    std::cout << man.dir().string() << "\n";
    return 0;
}

int cmd_estimate(const CommonOptions& common, const EstimateOptions& opt) {
    if (opt.inputs_path.empty()) throw ValidationError("inputs", "an inputs file is required");
    const std::string text = read_file(opt.inputs_path);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("inputs: ") + e.what(), 0);
    }
    EstimatorRequest req = parse_estimator_request(doc);
    if (common.seed) req.sampler.seed = *common.seed;
    if (opt.n_samples) req.sampler.n_samples = *opt.n_samples;
    if (opt.workers) req.sampler.workers = *opt.workers;

    RunManifest man("estimate", common.out, run_id_for(common, req.sampler.seed), req.sampler.seed);
    man.set_config(doc.dump());
    const json report = run_estimator(req);
    for (const auto& w : report.at("density_matrix").value("warnings", json::array())) man.warn(w.get<std::string>());
    man.write_artifact("report.json", report.dump(2) + "\n");
    man.finish();
    std::cout << man.dir().string() << "\n";
    return 0;
}

int cmd_timetags(const CommonOptions& common, const TimetagsOptions& opt) {
    const Config config = resolve_config(common);
    const Topology topology = parse_topology(opt.topology);

    DetectionConfig det;
    det.efficiency = opt.efficiency;
    det.jitter_fwhm = config.options.jitter_fwhm;
    det.bin_width = opt.bin_width;
    det.rep_period = opt.rep_period;
    det.n_pulses = opt.pulses;
    det.seed = config.options.seed;
    det.background_rate = config.options.background_rate;
    det.acquisition_window = opt.window;
    if (opt.phase_drift) det.phase_drift_rate = *opt.phase_drift;
    det.workers = opt.workers;
    det.validate(detector_count(topology));

    RunManifest man("timetags", common.out, run_id_for(common, det.seed), det.seed);
    man.set_config(serialize_config(config));
    man.set_field("n_pulses", config.sequence.n_pulses);
    man.set_field("source", opt.source);
    man.set_field("topology", to_string(topology));

    SourceModel source;
    std::optional<TimeGrid> grid;
    if (opt.source == "coherent" || opt.source == "single") {
        if (topology == Topology::Mzi) throw ValidationError("source", "mzi needs a field source (ideal or model)");
        source.emission = std::make_shared<IndependentEmission>(opt.source == "coherent"
                                                                    ? IndependentEmission::coherent(opt.coherent_mu, config.atom.gamma)
                                                                    : IndependentEmission::single_photon(config.atom.gamma));
    } else {
        const PulseSequence grid_seq = opt.source == "ideal" ? without_width(config.sequence) : config.sequence;
        grid = default_grid(config.atom, grid_seq, config.options.grid_step);
        const FieldState field = field_for(config, opt.source, *grid);
        source = SourceModel::from_field(field, config.atom.gamma_star, topology == Topology::Mzi);
    }

    const EventStream events = generate_events(source, topology, det);
    {
        std::ofstream out(man.dir() / "events.ttag", std::ios::binary);
        write_ttag(out, events);
    }
    man.add_artifact("events.ttag");

    const G2Histogram g2 = histogram_g2(events, det, opt.side_peaks);
    {
        std::ostringstream os;
        os.precision(12);
        os << "m,counts\n";
        for (std::size_t i = 0; i < g2.peak_index.size(); ++i) os << g2.peak_index[i] << ',' << g2.peak_counts[i] << '\n';
        man.write_artifact("g2_peaks.csv", os.str());
    }
    {
        std::ostringstream os;
        os.precision(12);
        os << "tau_ps,counts\n";
        for (std::size_t i = 0; i < g2.tau.size(); ++i) os << g2.tau[i] << ',' << g2.fine_counts[i] << '\n';
        man.write_artifact("g2_fine.csv", os.str());
    }

    std::vector<std::uint64_t> per_detector(static_cast<std::size_t>(events.n_detectors), 0);
    for (auto d : events.detector) ++per_detector[d];

    const auto pn = source.emission->number_probabilities();
    json closed{{"p", pn}};
    const double mu = pn[1] + 2.0 * pn[2] + 3.0 * pn[3];
    if (mu > 0.0) {
        const MomentSet m = moments_from_probabilities(pn);
        closed["mu"] = m.mu();
        closed["g2"] = m.g2;
        closed["g3"] = m.g3;
    }
    json summary{{"topology", to_string(topology)},
                 {"source", opt.source},
                 {"n_pulses", det.n_pulses},
                 {"n_events", events.size()},
                 {"events_per_detector", per_detector},
                 {"closed_form", closed}};
    const json g2_json{{"zero", g2.g2_zero}, {"sigma", g2.sigma}, {"side_mean", g2.side_mean}};

    if (topology == Topology::Hbt3) {
        summary["g2"] = g2_json;
        const G3Histogram g3 = histogram_g3(events, det);
        std::ostringstream os;
        os.precision(12);
        os << "m1,m2,counts,normalized\n";
        for (Eigen::Index i = 0; i < g3.counts.rows(); ++i) {
            for (Eigen::Index j = 0; j < g3.counts.cols(); ++j) {
                os << i - g3.half_width << ',' << j - g3.half_width << ',' << g3.counts(i, j) << ','
                   << g3.normalized(i, j) << '\n';
            }
        }
        man.write_artifact("g3.csv", os.str());
        summary["g3"] = {{"zero", g3.g3_zero}, {"sigma", g3.sigma}, {"reference_mean", g3.reference_mean}};
        if (grid) {
            const TimeGrid tg = tag_grid(det, grid->end());
            man.write_artifact("map_g2_tags.csv", csv_of_map(correlation_map_from_tags(events, det, topology, tg), opt.stride));
        }
    } else {
        summary["g2_hom_phase_mixed"] = g2_json;
        const auto windows = analyze_mzi_windows(events, det, opt.side_peaks);
        std::ostringstream os;
        os.precision(12);
        os << "first_pulse,n_pulses,phase,i_sh,g2_ratio,g2_hom,sigma\n";
        std::vector<std::pair<double, double>> points;
        for (const auto& w : windows) {
            os << w.first_pulse << ',' << w.n_pulses << ',' << w.phase << ',' << w.i_sh << ',' << w.g2_ratio << ','
               << w.g2_hom << ',' << w.sigma << '\n';
            points.emplace_back(w.i_sh, w.g2_hom);
        }
        man.write_artifact("mzi_windows.csv", os.str());
        summary["windows"] = windows.size();
        // The fit needs c1 and g2 from the source; both come from the deterministic maps here.
        const MapSet& maps = *source.maps;
        const double mu_maps = maps.mu();
        const double g2_src = mu_maps > 0.0 ? maps.g2.integral() / (mu_maps * mu_maps) : 0.0;
        try {
            const PhaseFit fit = fit_phase_quadratic(points, maps.c1(), g2_src);
            summary["phase_fit"] = {{"c1", maps.c1()},   {"g2", g2_src},         {"offset", fit.offset},
                                    {"curvature", fit.curvature}, {"c2", fit.c2}, {"c2_se", fit.c2_se},
                                    {"M", fit.M},        {"n_points", fit.n_points}};
        } catch (const NumericalError& e) {
            man.warn(std::string("phase fit skipped: ") + e.what());
        }
    }
    man.write_artifact("summary.json", summary.dump(2) + "\n");
    man.finish();
    std::cout << man.dir().string() << "\n";
    return 0;
}

}  // namespace pne::cli
