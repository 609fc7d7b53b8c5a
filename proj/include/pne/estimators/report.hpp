#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "pne/estimators/concurrence.hpp"
#include "pne/estimators/density_matrix.hpp"
#include "pne/estimators/fidelity.hpp"
#include "pne/estimators/moments.hpp"

namespace pne {

enum class BellCase { PsiPlus, PhiPlus };

/// Everything `estimate` needs. Probabilities come from `moments`; the intensity scale
/// mu~ (or mu~_pi) defaults to the midpoint of its admissible interval when left empty.
struct EstimatorRequest {
    BellCase bell = BellCase::PhiPlus;
    MomentSet moments;
    /// Published p_n used as-is instead of inverting `moments`; mu_pi still comes from moments.
    std::optional<NumberProbabilities> probabilities;
    std::optional<double> mu_tilde;
    double mu_bar_e = 0.5;
    double M_ee = 1.0, M_ll = 1.0;
    double coherence = 1.0;  ///< M_el for psi_plus, c2_el for phi_plus
    std::optional<double> M_s;
    double sigma_mu_tilde = 0.0, sigma_mu_bar = 0.0, sigma_M_ee = 0.0, sigma_M_ll = 0.0, sigma_coherence = 0.0;
    SamplerOptions sampler;
};

/// Parses the estimator input document. Unknown keys raise ParseError. Either "moments" or
/// "probabilities" ({"p": [4], "sigma": [4], "mu_pi": x}) must be present, not both.
EstimatorRequest parse_estimator_request(const nlohmann::json& doc);

/// Runs probabilities -> fidelity -> partial density matrix -> concurrence and returns the
/// report: inputs, probabilities, fidelity with range, density matrix, concurrence summary,
/// 64-bin histogram and acceptance statistics.
nlohmann::json run_estimator(const EstimatorRequest& req);

nlohmann::json to_json(const NumberProbabilities& p);
nlohmann::json to_json(const FidelityEstimate& f);
nlohmann::json to_json(const PartialDensityMatrix& dm);
nlohmann::json to_json(const ConcurrenceEstimate& c);

}  // namespace pne
