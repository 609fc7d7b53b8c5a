#include "pne/core/photonic_state.hpp"

#include <cmath>

#include "pne/core/errors.hpp"

namespace pne {

bool matches_vacuum_pair_pattern(const std::string& bits) {
    std::size_t i = 0;
    while (i < bits.size()) {
        if (bits[i] == '1') {
            ++i;
        } else if (bits[i] == '0' && i + 1 < bits.size() && bits[i + 1] == '0') {
            i += 2;
        } else {
            return false;
        }
    }
    return true;
}

PhotonicState::PhotonicState(std::size_t n_bins, AmplitudeMap amplitudes)
    : n_bins_(n_bins), amplitudes_(std::move(amplitudes)) {
    for (const auto& [bits, amp] : amplitudes_) {
        if (bits.size() != n_bins_) {
            throw ValidationError("amplitudes", "bitstring '" + bits + "' has wrong length");
        }
        if (bits.find_first_not_of("01") != std::string::npos) {
            throw ValidationError("amplitudes", "bitstring '" + bits + "' is not binary");
        }
        if (!matches_vacuum_pair_pattern(bits)) {
            throw ValidationError("amplitudes", "bitstring '" + bits + "' breaks the (1|00)* pattern");
        }
        if (!std::isfinite(amp.real()) || !std::isfinite(amp.imag())) {
            throw ValidationError("amplitudes", "non-finite amplitude");
        }
    }
}

cplx PhotonicState::amplitude(const std::string& bits) const {
    auto it = amplitudes_.find(bits);
    return it == amplitudes_.end() ? cplx{} : it->second;
}

double PhotonicState::norm_squared() const {
    double s = 0.0;
    for (const auto& kv : amplitudes_) s += std::norm(kv.second);
    return s;
}

bool PhotonicState::is_normalized(double tol) const { return std::abs(norm_squared() - 1.0) <= tol; }

PhotonicState normalize(const PhotonicState& state) {
    const double n2 = state.norm_squared();
    if (!(n2 > 0.0)) throw ValidationError("amplitudes", "cannot normalize an all-zero state");
    const double inv = 1.0 / std::sqrt(n2);
    PhotonicState::AmplitudeMap out;
    for (const auto& [bits, amp] : state.amplitudes()) out.emplace(bits, amp * inv);
    return PhotonicState(state.n_bins(), std::move(out));
}

}  // namespace pne
