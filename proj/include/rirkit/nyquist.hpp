#pragma once

#include <string>
#include <vector>

#include "rirkit/polynomial.hpp"
#include "rirkit/transfer.hpp"

namespace rirkit {

/// inverse: plot of L(z^-1) on z = (1-eps)e^{jw}.
/// direct:  plot of L(z) on z = (1+eps)e^{jw}.
enum class ContourMap { inverse, direct };

struct ContourSpec {
  double epsilon = 1e-3;
  int samples = 4096;
  ContourMap map = ContourMap::inverse;
  // Crossings within `exclude_halfwidth` of +-center are ignored.
  std::vector<double> exclude_centers;
  double exclude_halfwidth = 1e-4;
};

struct Crossing {
  double omega = 0.0;
  double real = 0.0;
  int direction = 0;  // +1: Im goes - to +, -1: + to -
};

struct CrossingReport {
  int nu_plus = 0;
  int nu_minus = 0;
  int nu_o = 0;
  int encirclements_cw = 0;
  // Clockwise winding about 1+j0 from accumulated argument; only
  // meaningful without exclusion windows.
  int winding_cw = 0;
  std::vector<Crossing> crossings;
  double epsilon_used = 0.0;
  std::string warning;
};

/// Point of the Nyquist plot at parameter w for the given contour.
cplx contour_point(const RationalTF& L, const ContourSpec& spec, double omega);

/// Transverse crossings of the ray (1, inf), w running from -pi to pi.
/// Throws NumericalError("degenerate crossing") when the plot passes through
/// 1+j0 outside the exclusion windows.
CrossingReport crossing_counts(const RationalTF& L, const ContourSpec& spec);

/// Roots of den(L) - num(L): poles of the positive feedback loop L/(1-L).
RootSet closed_loop_poles(const RationalTF& L);

struct Lemma1Result {
  int n = 0;
  bool holds = false;          // ground truth from closed-loop roots
  bool nyquist_holds = false;  // certificate nu_o(eps) = -n
  std::vector<double> epsilons;
  std::vector<int> nu_o;
  bool coarse_disagree = false;
  double max_root_modulus = 0.0;
  std::string diagnostic;
};

/// Closed-loop stability via the indented contour, over the epsilon decades 1e-2 .. 1e-8; the certificate uses the
/// three smallest and requires them to agree ("eps_+ not found" otherwise).
Lemma1Result lemma1_check(const RationalTF& L, int n);

enum class Mode { conjugate_pair, pole_at_plus_one, pole_at_minus_one, none };

std::string to_string(Mode m);

struct BoundaryRoot {
  cplx location;
  int multiplicity = 1;
};

struct VerdictOptions {
  double unity_tol = 1e-6;       // |L(e^{jw_c}) - 1|
  double rate_tol = 1e-8;        // |A'(w_c)|
  double boundary_tol = 1e-7;    // ||root| - 1| for boundary roots
  double exclusion = 1e-4;       // window around +-w_c
};

struct StabilityVerdict {
  bool all_in_closed_disk = false;
  std::vector<BoundaryRoot> boundary_roots;
  bool marginal = false;
  bool single_mode = false;
  Mode mode = Mode::none;

  // Nyquist/PCR certificate.
  bool cond_i = false;
  bool cond_iia = false;
  bool cond_iib = false;
  int n = 0;
  int nu_o0 = 0;
  double theta_rate = 0.0;
  bool certificate = false;

  bool roots_agree = true;
  double max_root_modulus = 0.0;
  std::string diagnostic;
};

/// Single-mode marginal stability of the positive feedback loop around L at
/// the critical frequency w_c. Root locations decide the verdict; the
/// Nyquist/PCR certificate is reported alongside.
StabilityVerdict marginal_verdict(const RationalTF& L, double omega_c,
                                  const VerdictOptions& opts = {});

}  // namespace rirkit
