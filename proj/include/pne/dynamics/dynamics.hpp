#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pne/core/types.hpp"
#include "pne/dynamics/collision.hpp"
#include "pne/dynamics/field_state.hpp"

namespace pne {

/// Single-pulse wavefunctions on a grid. f1, f1_noise are unit-normalised on the grid cells.
/// The two-photon amplitude is f2(t1, t2) = f2_scale * f1_noise(t1) * f1(t2) for t1 <= t2
/// (half weight on the diagonal cell), normalised to one.
struct TemporalWavefunctions {
    TimeGrid grid;
    Eigen::VectorXcd f1;
    Eigen::VectorXcd f1_noise;
    double f2_scale = 1.0;
    double p0 = 0.0, p1 = 0.0, p2 = 0.0;
    cplx noise_overlap{0.0, 0.0};  ///< <f1_noise|f1>
    std::vector<std::string> warnings;

    cplx f2(std::size_t i, std::size_t j) const;
    Eigen::MatrixXcd f2_dense() const;
    /// c0 = sqrt(p0), psi1 = sqrt(p1) f1, phi = sqrt(p2/2) (f2 + f2^T).
    FieldState field_state() const;
};

/// Fast-pulse closed form for a square pulse of area Omega*tp starting at t = 0.
/// Throws NumericalError when fewer than 8 cells cover the pulse.
TemporalWavefunctions single_pulse(const AtomParams& atom, double rabi, double tp, const TimeGrid& grid);

struct BinProbabilities {
    double p0 = 0.0, p01 = 0.0, p10 = 0.0, p20 = 0.0, p11 = 0.0;

    double p1() const { return p01 + p10; }
    double p2() const { return p20 + p11; }
    double p3_estimate() const { return 1.0 - (p0 + p1() + p2()); }
};

/// Short-pulse closed forms for two pi pulses separated by dt (bin threshold T = dt + tp).
BinProbabilities two_pulse_closed_form(double gamma, double tp, double dt);

/// Two-pulse decomposition. Interval probabilities, component wavefunctions and `simulated`
/// come from the collision model; `closed_form` holds the short-pulse expressions.
struct TwoPulseDecomposition {
    double tp = 0.0, dt = 0.0;
    double threshold = 0.0;  ///< T = dt + tp
    BinProbabilities closed_form;
    BinProbabilities simulated;
    /// Keys "n1n2n3n4" over the intervals (0,tp), (tp,dt), (dt,dt+tp), (dt+tp,inf).
    std::map<std::string, double> intervals;

    TimeGrid grid;
    Eigen::VectorXcd f10, f01;  ///< unit-normalised early / late one-photon parts
    Eigen::MatrixXcd f20;       ///< unit-normalised early-early part, symmetric
    Eigen::VectorXcd f_e, f_l;  ///< f11(t1, t2) ~ f_e(t1) f_l(t2), each unit-normalised
    double separability = 0.0;  ///< sigma_2/sigma_1 of the early-late block
    FieldState field;           ///< full coherent state on `grid`

    double p1() const { return closed_form.p1(); }
    double p2() const { return closed_form.p2(); }
    double p3_estimate() const { return closed_form.p3_estimate(); }
};

/// `oracle_step` <= 0 picks grid.step / ceil(grid.step / 0.01).
TwoPulseDecomposition two_pulse(const AtomParams& atom, double rabi, double tp, double dt,
                                const TimeGrid& grid, double oracle_step = 0.0);

/// Field of an arbitrary pulse sequence from the collision model, projected on `grid`.
FieldState simulate_field(const AtomParams& atom, const PulseSequence& seq, const TimeGrid& grid,
                          double oracle_step = 0.0);

/// (3 gamma / 8) sqrt(tp^2 + s^2).
double overlap_fraction(double gamma, double tp, double jitter_fwhm);

/// Columns t, re(f1), im(f1), |f1|^2 with a header row.
void write_wavefunction_csv(std::ostream& os, const TimeGrid& grid, const Eigen::VectorXcd& f1);

}  // namespace pne
