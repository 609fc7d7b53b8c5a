#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <string>

namespace pne {

using cplx = std::complex<double>;

/// True when `bits` reads as a chronological sequence of "1" and "00" tokens.
bool matches_vacuum_pair_pattern(const std::string& bits);

/// Sparse amplitude map over the N-bin occupation basis. Keys are chronological bitstrings
/// (first-emitted bin leftmost). Construction checks key length, alphabet and the (1|00)*
/// pattern; it does not require unit norm, see `normalize` and `is_normalized`.
class PhotonicState {
public:
    using AmplitudeMap = std::map<std::string, cplx>;

    PhotonicState() = default;
    PhotonicState(std::size_t n_bins, AmplitudeMap amplitudes);

    std::size_t n_bins() const { return n_bins_; }
    const AmplitudeMap& amplitudes() const { return amplitudes_; }
    std::size_t size() const { return amplitudes_.size(); }

    /// Amplitude of `bits`, zero when absent.
    cplx amplitude(const std::string& bits) const;
    double norm_squared() const;
    bool is_normalized(double tol = 1e-12) const;

    bool operator==(const PhotonicState&) const = default;

private:
    std::size_t n_bins_ = 0;
    AmplitudeMap amplitudes_;
};

/// Rescales to unit norm, keeping relative phases. Throws ValidationError on an all-zero state.
PhotonicState normalize(const PhotonicState& state);

}  // namespace pne
