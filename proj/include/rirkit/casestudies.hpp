#pragma once

#include <string>
#include <vector>

#include "rirkit/rir.hpp"
#include "rirkit/transfer.hpp"

namespace rirkit {

// ---- magnetic levitation ---------------------------------------------------

/// g(s) = k / ((p^2 - s^2)(tau s + 1)) sampled with period T.
struct MaglevParams {
  double k = 1.0;
  double p = 1.0;
  double tau = 0.1;
  double T = 0.01;

  void validate() const;
};

struct MaglevCoefficients {
  double N1 = 0.0, N2 = 0.0, N3 = 0.0;
  double E1 = 0.0, E2 = 0.0, E3 = 0.0;  // e^{pT}, e^{-pT}, e^{-T/tau}
  double beta2 = 0.0, beta1 = 0.0, beta0 = 0.0;
};

MaglevCoefficients maglev_coefficients(const MaglevParams& prm);

/// Partial-fraction form evaluated directly.
cplx maglev_partial_fraction(const MaglevParams& prm, cplx z);

/// g_d(1) from the partial fractions with 1 - E_i taken through expm1.
double maglev_dc_gain(const MaglevParams& prm);

/// ZOH equivalent as (k/p^2)(beta2 z^2 + beta1 z + beta0)/((z-E1)(z-E2)(z-E3)).
/// Cross-checks against the partial-fraction form; VerificationError on
/// relative mismatch above 1e-10.
RationalTF maglev_zoh(const MaglevParams& prm);

/// ((b+1)z + 1 - b)/((a+1)z + 1 - a), b > a > 0.
RationalTF highpass(double a, double b);

struct MaglevBound {
  double theta_rate0 = 0.0;  // theta'_{g_d}(0)
  double P = 0.0;
  double abar = 0.0;
  double ratio = 0.0;
  // Validation with a = abar (1 - 1e-6), b = a + P.
  double a = 0.0, b = 0.0;
  double max_gain_rate = 0.0;
  double max_gain_rate_omega = 0.0;
  double compensated_rate0 = 0.0;
  bool validated = false;
};

/// Throws PreconditionError("compensation unnecessary") when theta'_{g_d}(0) >= 0.
MaglevBound maglev_upper_bound(const MaglevParams& prm, double eps);

/// tau -> 0 limit of P/abar: 2(1+eps)^2 / (1 - 4/kappa - (1+eps)^2).
double maglev_tau_limit(double p, double T, double eps);

// ---- FitzHugh-Nagumo -------------------------------------------------------

struct FHNModel {
  double c = 1.0;
  double alpha = 0.7;
  double beta = 0.8;
  double tau = 0.01;
  double d = 10.0;
  double I = 0.4;

  double A() const;
  double B() const;
  double D() const;
  // 1 + (A - 1) x^2 / 3
  double den(double x) const;
  void validate() const;
};

struct FixedPoint {
  double xbar = 0.0;
  double ybar = 0.0;
  double e = 0.0;
  double residual = 0.0;
};

FixedPoint fhn_fixed_point(const FHNModel& m, double e);

struct Jacobian2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;
  // Gradient of the perturbation input v = (1 - A) y / den(x).
  double kx = 0.0, ky = 0.0;
};

Jacobian2 fhn_jacobian(const FHNModel& m, const FixedPoint& fp);

/// Central-difference counterpart of fhn_jacobian.
Jacobian2 fhn_jacobian_fd(const FHNModel& m, const FixedPoint& fp, double h = 1e-6);

/// SISO transfer seen by the perturbation block at the fixed point for
/// delta(1) = e; the closed loop is 1 - delta(z) g_e(z) = 0.
RationalTF fhn_linearize(const FHNModel& m, double e);

struct SweepPoint {
  double e = 0.0;
  double inv_norm = 0.0;
};

struct FHNSearch {
  double e_o = 0.0;
  FixedPoint fixed_point;
  RationalTF g_eo = RationalTF::constant(1.0);
  double inv_norm = 0.0;
  double omega_p = 0.0;
  RIRVerdict analysis;
  std::vector<SweepPoint> sweep;
};

/// Root of |e| - 1/||g_e|| nearest to e = 0, plus the sweep over [-0.5, 0.5].
FHNSearch fhn_search_eo(const FHNModel& m, double sweep_step = 0.01);

/// 1 + mu (z^2 - 2 cos(w_p) z + 1)/(z - r)^2 with h(1) = 1/(1+eps), h(e^{jw_p}) = 1.
RationalTF h_shaper(double eps, double omega_p, double r = 0.5);

struct FHNPerturbation {
  SynthResult synth;
  RationalTF delta_f = RationalTF::constant(1.0);
  RationalTF h = RationalTF::constant(1.0);
  RationalTF delta = RationalTF::constant(1.0);  // (1 + eps) h delta_f
  double dc = 0.0;
};

FHNPerturbation fhn_perturbation(double e_o, const RationalTF& g_eo, double eps,
                                 double r = 0.5);

struct Trajectory {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::vector<double>> state;  // filter state per step, optional
  bool diverged = false;
};

struct SimOptions {
  bool record_state = false;
  double divergence = 1e6;
};

/// Iterates the map with delta filtering v_n = (1 - A) y_n / den(x_n) and
/// adding its output to x_{n+1}. The filter state starts at the steady state
/// of the constant input v at the fixed point for e = delta(1).
Trajectory fhn_simulate(const FHNModel& m, const RationalTF& delta, int steps,
                        double x0, double y0, const SimOptions& opts = {});

enum class Oscillation { oscillating, converged, indeterminate };

std::string to_string(Oscillation o);

struct OscillationReport {
  double amplitude = 0.0;  // last-quarter peak-to-peak of x
  Oscillation verdict = Oscillation::indeterminate;
};

OscillationReport oscillation_amplitude(const std::vector<double>& x,
                                        double hi = 0.1, double lo = 1e-3);

}  // namespace rirkit
