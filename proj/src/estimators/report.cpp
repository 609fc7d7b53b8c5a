#include "pne/estimators/report.hpp"

#include <set>

#include "pne/core/errors.hpp"

namespace pne {
namespace {

using nlohmann::json;

const char* status_name(ElementStatus s) {
    switch (s) {
        case ElementStatus::Measured: return "measured";
        case ElementStatus::Bounded: return "bounded";
        case ElementStatus::Free: return "free";
    }
    return "free";
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + " must be an object", 0);
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ParseError("unknown key '" + key + "' in " + where, 0);
    }
}

double number(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ParseError(std::string("'") + key + "' must be a number", 0);
    return v.get<double>();
}

}  // namespace

EstimatorRequest parse_estimator_request(const json& doc) {
    reject_unknown(doc, {"case", "moments", "probabilities", "bins", "sigmas", "mu_tilde", "M_s", "sampler"},
                   "estimator input");
    EstimatorRequest r;
    const std::string c = doc.value("case", std::string("phi_plus"));
    if (c == "phi_plus") {
        r.bell = BellCase::PhiPlus;
    } else if (c == "psi_plus") {
        r.bell = BellCase::PsiPlus;
    } else {
        throw ValidationError("case", "expected psi_plus or phi_plus, got '" + c + "'");
    }
    if (doc.contains("moments") == doc.contains("probabilities")) {
        throw ParseError("exactly one of 'moments' and 'probabilities' is required", 0);
    }
    if (doc.contains("probabilities")) {
        const json& pj = doc.at("probabilities");
        reject_unknown(pj, {"p", "sigma", "mu_pi"}, "probabilities");
        NumberProbabilities np;
        auto read4 = [&](const char* key, std::array<double, 4>& out, bool required) {
            if (!pj.contains(key)) {
                if (required) throw ParseError(std::string("missing 'probabilities.") + key + "'", 0);
                return;
            }
            const json& a = pj.at(key);
            if (!a.is_array() || a.size() != 4) throw ParseError(std::string("'") + key + "' must hold p0..p3", 0);
            for (std::size_t n = 0; n < 4; ++n) {
                if (!a[n].is_number()) throw ParseError(std::string("'") + key + "' must hold numbers", 0);
                out[n] = a[n].get<double>();
            }
        };
        read4("p", np.p, true);
        read4("sigma", np.sigma, false);
        for (std::size_t n = 0; n < 4; ++n) {
            if (!(np.sigma[n] >= 0.0)) throw ValidationError("sigma", "probability uncertainties must be >= 0");
            if (np.p[n] < -3.0 * np.sigma[n] - 1e-12) {
                throw UnphysicalError("p" + std::to_string(n), "lies below -3 sigma");
            }
        }
        np.mu = np.p[1] + 2.0 * np.p[2] + 3.0 * np.p[3];
        r.probabilities = np;
        r.moments.mu_pi = number(pj, "mu_pi", 1.0);
        r.moments.mu_ratio = np.mu / r.moments.mu_pi;
    }
    const json& m = doc.contains("moments") ? doc.at("moments") : json::object();
    reject_unknown(m, {"mu_ratio", "g2", "g3", "mu_pi", "sigma_mu_ratio", "sigma_g2", "sigma_g3", "sigma_mu_pi"},
                   "moments");
    if (doc.contains("moments")) r.moments.mu_ratio = number(m, "mu_ratio", 1.0);
    r.moments.g2 = number(m, "g2", 0.0);
    r.moments.g3 = number(m, "g3", 0.0);
    if (doc.contains("moments")) r.moments.mu_pi = number(m, "mu_pi", 1.0);
    r.moments.sigma_mu_ratio = number(m, "sigma_mu_ratio", 0.0);
    r.moments.sigma_g2 = number(m, "sigma_g2", 0.0);
    r.moments.sigma_g3 = number(m, "sigma_g3", 0.0);
    r.moments.sigma_mu_pi = number(m, "sigma_mu_pi", 0.0);

    const json bins = doc.value("bins", json::object());
    const char* coherence_key = r.bell == BellCase::PsiPlus ? "M_el" : "c2_el";
    reject_unknown(bins, {"mu_bar_e", "M_ee", "M_ll", coherence_key}, "bins");
    r.mu_bar_e = number(bins, "mu_bar_e", 0.5);
    r.M_ee = number(bins, "M_ee", 1.0);
    r.M_ll = number(bins, "M_ll", 1.0);
    r.coherence = number(bins, coherence_key, 1.0);

    const json sig = doc.value("sigmas", json::object());
    reject_unknown(sig, {"mu_tilde", "mu_bar", "M_ee", "M_ll", coherence_key}, "sigmas");
    r.sigma_mu_tilde = number(sig, "mu_tilde", 0.0);
    r.sigma_mu_bar = number(sig, "mu_bar", 0.0);
    r.sigma_M_ee = number(sig, "M_ee", 0.0);
    r.sigma_M_ll = number(sig, "M_ll", 0.0);
    r.sigma_coherence = number(sig, coherence_key, 0.0);

    if (doc.contains("mu_tilde") && !doc.at("mu_tilde").is_null()) r.mu_tilde = number(doc, "mu_tilde", 0.0);
    if (doc.contains("M_s") && !doc.at("M_s").is_null()) r.M_s = number(doc, "M_s", 0.0);

    const json s = doc.value("sampler", json::object());
    reject_unknown(s, {"n_samples", "seed", "workers", "chunk_size", "measurement_noise"}, "sampler");
    if (s.contains("n_samples")) r.sampler.n_samples = s.at("n_samples").get<std::uint64_t>();
    if (s.contains("seed")) r.sampler.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("workers")) r.sampler.workers = s.at("workers").get<unsigned>();
    if (s.contains("chunk_size")) r.sampler.chunk_size = s.at("chunk_size").get<std::uint64_t>();
    if (s.contains("measurement_noise")) r.sampler.include_measurement_noise = s.at("measurement_noise").get<bool>();
    return r;
}

json to_json(const NumberProbabilities& p) {
    return json{{"p", p.p}, {"sigma", p.sigma}, {"mu", p.mu}};
}

json to_json(const FidelityEstimate& f) {
    json j{{"value", f.value}, {"range", {f.range_min, f.range_max}}};
    if (f.bound) j["bound"] = *f.bound;
    return j;
}

json to_json(const PartialDensityMatrix& dm) {
    static const char* names[] = {"00", "01", "10", "11"};
    json elems = json::array();
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) {
            const DmElement& e = dm.at(i, j);
            json x{{"row", names[i]}, {"col", names[j]}, {"status", status_name(e.status)}};
            if (e.status == ElementStatus::Measured) {
                x["value"] = e.value;
                x["sigma"] = e.sigma;
            }
            if (e.status != ElementStatus::Measured || i != j) x["upper"] = e.upper;
            elems.push_back(x);
        }
    }
    return json{{"elements", elems}, {"warnings", dm.warnings}};
}

json to_json(const ConcurrenceEstimate& c) {
    return json{{"mean", c.mean},
                {"std", c.std},
                {"normalized_mean", c.normalized_mean},
                {"histogram", {{"bins", 64}, {"range", {0.0, 1.0}}, {"counts", c.histogram}}},
                {"n_accepted", c.n_accepted},
                {"n_rejected", c.n_rejected},
                {"acceptance_rate", c.acceptance_rate()}};
}

json run_estimator(const EstimatorRequest& req) {
    const NumberProbabilities probs = req.probabilities ? *req.probabilities : probabilities_from_moments(req.moments);
    json report;
    report["inputs"] = {
        {"case", req.bell == BellCase::PsiPlus ? "psi_plus" : "phi_plus"},
        {"moments",
         {{"mu_ratio", req.moments.mu_ratio}, {"g2", req.moments.g2}, {"g3", req.moments.g3},
          {"mu_pi", req.moments.mu_pi}, {"sigma_mu_ratio", req.moments.sigma_mu_ratio},
          {"sigma_g2", req.moments.sigma_g2}, {"sigma_g3", req.moments.sigma_g3},
          {"sigma_mu_pi", req.moments.sigma_mu_pi}}},
        {"mu_bar_e", req.mu_bar_e},
        {"M_ee", req.M_ee},
        {"M_ll", req.M_ll},
        {req.bell == BellCase::PsiPlus ? "M_el" : "c2_el", req.coherence},
        {"sampler", {{"n_samples", req.sampler.n_samples}, {"seed", req.sampler.seed},
                     {"chunk_size", req.sampler.chunk_size},
                     {"measurement_noise", req.sampler.include_measurement_noise}}}};
    if (req.probabilities) report["inputs"]["probabilities"] = to_json(*req.probabilities);
    report["probabilities"] = to_json(probs);

    PartialDensityMatrix dm;
    if (req.bell == BellCase::PsiPlus) {
        PsiPlusInputs in;
        in.p1 = probs.p[1];
        in.mu_pi = req.moments.mu_pi;
        in.mu_tilde_pi = req.mu_tilde.value_or(0.5 * (in.p1 + in.mu_pi));
        in.mu_bar_e = req.mu_bar_e;
        in.mu_bar_l = 1.0 - req.mu_bar_e;
        in.M_ee = req.M_ee;
        in.M_ll = req.M_ll;
        in.M_el = req.coherence;
        in.M_s = req.M_s;
        report["inputs"]["mu_tilde_pi"] = in.mu_tilde_pi;
        report["fidelity"] = to_json(fidelity_psi_plus(in));
        PsiPlusSigmas s{req.sigma_mu_tilde, req.sigma_mu_bar, req.sigma_M_ee, req.sigma_M_ll, req.sigma_coherence};
        dm = build_partial_dm(in, s, probs);
    } else {
        PhiPlusInputs in;
        in.p0 = probs.p[0];
        in.p2 = probs.p[2];
        in.mu = probs.mu;
        in.mu_tilde = req.mu_tilde.value_or(0.5 * (2.0 * in.p2 + in.mu));
        in.mu_bar_e = req.mu_bar_e;
        in.mu_bar_l = 1.0 - req.mu_bar_e;
        in.M_ee = req.M_ee;
        in.M_ll = req.M_ll;
        in.c2_el = req.coherence;
        report["inputs"]["mu_tilde"] = in.mu_tilde;
        report["fidelity"] = to_json(fidelity_phi_plus(in));
        PhiPlusSigmas s{probs.sigma[0], probs.sigma[2], req.sigma_mu_tilde, req.sigma_mu_bar,
                        req.sigma_M_ee, req.sigma_M_ll, req.sigma_coherence};
        dm = build_partial_dm(in, s, probs);
    }
    report["density_matrix"] = to_json(dm);
    report["concurrence"] = to_json(sample_concurrence(dm, req.sampler));
    return report;
}

}  // namespace pne
