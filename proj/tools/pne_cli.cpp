#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "manifest.hpp"
#include "pne/core/errors.hpp"

namespace {

enum ExitCode { kOk = 0, kOther = 1, kValidation = 2, kUnphysical = 3, kNumerical = 4 };

void add_common(CLI::App* sub, pne::cli::CommonOptions& o) {
    sub->add_option("--config", o.config_path, "YAML or JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--N", o.n_pulses, "number of pulses");
    sub->add_option("--dt", o.dt, "chronological pulse separations in ps (comma list)")->delimiter(',');
    sub->add_option("--tp", o.tp, "pulse width in ps");
    sub->add_option("--T1", o.t1, "radiative lifetime in ps");
    sub->add_option("--gamma-star", o.gamma_star, "pure-dephasing rate in 1/ps");
    sub->add_option("--jitter", o.jitter, "detector jitter FWHM in ps");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--out", o.out, "output root directory")->capture_default_str();
    sub->add_option("--run-id", o.run_id, "run directory name (default: UTC timestamp and seed)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Photon-number entanglement toolkit"};
    app.set_version_flag("--version", pne::cli::kVersion);
    app.require_subcommand(1);

    pne::cli::CommonOptions common;

    pne::cli::SequenceOptions seq;
    auto* sequence = app.add_subcommand("sequence", "ideal photonic state of a pulse sequence");
    add_common(sequence, common);
    sequence->add_flag("--golden", seq.golden, "use the equal-amplitude (golden) schedule");

    pne::cli::CorrelateOptions cor;
    auto* correlate = app.add_subcommand("correlate", "two-time correlation maps and threshold sweep");
    add_common(correlate, common);
    correlate->add_option("--source", cor.source, "ideal or model")->check(CLI::IsMember({"ideal", "model"}))->capture_default_str();
    correlate->add_option("--stride", cor.stride, "map CSV decimation")->capture_default_str();
    correlate->add_option("--sweep-points", cor.sweep_points, "number of thresholds in the sweep")->capture_default_str();
    correlate->add_option("--threshold", cor.threshold, "quadrant split reported in summary.json (ps)");

    pne::cli::EstimateOptions est;
    auto* estimate = app.add_subcommand("estimate", "fidelity and concurrence bounds from measured moments or probabilities");
    add_common(estimate, common);
    estimate->add_option("--inputs", est.inputs_path, "estimator input JSON")->required()->check(CLI::ExistingFile);
    estimate->add_option("--samples", est.n_samples, "Monte Carlo samples");
    estimate->add_option("--workers", est.workers, "sampler threads");

    pne::cli::TimetagsOptions tt;
    auto* timetags = app.add_subcommand("timetags", "simulated click streams and histograms");
    add_common(timetags, common);
    timetags->add_option("--topology", tt.topology, "hbt3 or mzi")->capture_default_str();
    timetags->add_option("--source", tt.source, "ideal, model, coherent or single")
        ->check(CLI::IsMember({"ideal", "model", "coherent", "single"}))
        ->capture_default_str();
    timetags->add_option("--pulses", tt.pulses, "number of excitation pulses")->capture_default_str();
    timetags->add_option("--efficiency", tt.efficiency, "detector efficiencies (one value or one per detector)")->delimiter(',');
    timetags->add_option("--rep-period", tt.rep_period, "pulse repetition period in ps")->capture_default_str();
    timetags->add_option("--bin-width", tt.bin_width, "histogram bin width in ps")->capture_default_str();
    timetags->add_option("--window", tt.window, "acquisition window in s (mzi phase held constant)")->capture_default_str();
    timetags->add_option("--phase-drift", tt.phase_drift, "mzi phase drift in rad/s");
    timetags->add_option("--mu", tt.coherent_mu, "mean photon number of the coherent source")->capture_default_str();
    timetags->add_option("--side-peaks", tt.side_peaks, "side peaks per sign for normalisation")->capture_default_str();
    timetags->add_option("--workers", tt.workers, "generator threads")->capture_default_str();
    timetags->add_option("--stride", tt.stride, "map CSV decimation")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (sequence->parsed()) return pne::cli::cmd_sequence(common, seq);
        if (correlate->parsed()) return pne::cli::cmd_correlate(common, cor);
        if (estimate->parsed()) return pne::cli::cmd_estimate(common, est);
        if (timetags->parsed()) return pne::cli::cmd_timetags(common, tt);
    } catch (const pne::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kValidation;
    } catch (const pne::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kValidation;
    } catch (const pne::UnphysicalError& e) {
        std::cerr << "unphysical regime: " << e.what() << "\n";
        return kUnphysical;
    } catch (const pne::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOther;
}
