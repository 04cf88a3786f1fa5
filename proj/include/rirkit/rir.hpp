#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "rirkit/nyquist.hpp"
#include "rirkit/transfer.hpp"

namespace rirkit {

enum class RIRStatus {
  exact_sufficient,
  exact_boundary,
  not_exact,
  strictly_greater,
  inconclusive
};

std::string to_string(RIRStatus s);

struct RIRVerdict {
  ClassTag cls;
  double theta_p = 0.0;     // principal value in (-pi, pi]
  double theta_rate = 0.0;
  double rho = 0.0;         // 0 for boundary peaks
  RIRStatus status = RIRStatus::inconclusive;
  double lower_bound = 0.0;  // 1/||g||
  std::string explanation;
};

struct AnalyzeOptions {
  double rate_tol = 1e-7;
  NormOptions norm;
};

/// |sin(theta_p) / sin(omega_p)|, omega_p in (0, pi).
double rho_threshold(double omega_p, double theta_p);

RIRVerdict exact_rir_analyze(const RationalTF& g, const AnalyzeOptions& opts = {});

/// scale * c * (a z + 1)/(z + a), or scale * c when `constant`.
struct AllPassSpec {
  int c = 1;
  double a = 0.0;
  bool constant = false;
  double scale = 1.0;

  RationalTF tf() const;
};

/// Phase of (a z + 1)/(z + a) at e^{jw}; lies in (-pi, 0) for w in (0, pi).
double first_order_phase(double a, double omega);
/// (a^2 - 1)/|e^{jw} + a|^2.
double first_order_rate(double a, double omega);

/// First-order all-pass (or constant) with phase theta_p at omega_p.
AllPassSpec allpass_phase_match(double omega_p, double theta_p);

struct SynthResult {
  RIRVerdict analysis;
  AllPassSpec spec;
  RationalTF f = RationalTF::constant(1.0);
  double f_norm = 0.0;
  cplx loop_at_peak;
  StabilityVerdict verdict;
};

/// Minimum-norm marginally stabilizing perturbation. Throws
/// PreconditionError unless the analysis reports exact_sufficient and
/// VerificationError when the post-hoc checks fail.
SynthResult synth_marginal_perturbation(const RationalTF& g,
                                        const AnalyzeOptions& opts = {});

/// Reproducible uniform doubles in [0, 1) from mt19937_64.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed);
  double next();
  double between(double lo, double hi) { return lo + (hi - lo) * next(); }

 private:
  std::mt19937_64 eng_;
};

struct PcrSearchResult {
  double best = 0.0;
  double bound = 0.0;  // -|sin(theta_p)/sin(omega_p)|, 0 at the boundary
  std::string description;
  int evaluated = 0;
  int skipped = 0;
};

/// Randomized search over stable all-pass products of order <= max_order
/// constrained to phase theta_p at omega_p. Returns the largest PCR found.
PcrSearchResult pcr_max_search(double omega_p, double theta_p, int max_order,
                               int trials, std::uint64_t seed);

struct Lemma4Result {
  int order = 0;
  double rate = 0.0;
  double bound = 0.0;
  bool holds = false;
  bool equality_expected = false;
};

/// theta_f'(w) <= -|sin(theta_f(w))/sin(w)| for a stable all-pass f with
/// real poles; equality for orders 0 and 1.
Lemma4Result lemma4_bound_check(const RationalTF& f, double omega_p);

struct Lemma5Witness {
  double alpha_c = 0.0, beta_c = 0.0;
  double alpha_r = 0.0, beta_r = 0.0;
  double lambda = 0.0;
  double u1 = 0.0, u2 = 0.0, u3 = 0.0;  // +inf when the branch is inactive
  double phase_gap = 0.0;               // |f_r - f_c| at e^{jw}
  double rate_c = 0.0, rate_r = 0.0;

  double u_min() const;
};

/// (alpha z^2 + beta z + 1)/(z^2 + beta z + alpha).
RationalTF second_order_allpass(double alpha, double beta);

Lemma5Witness lemma5_construct(double alpha_c, double beta_c, double omega_p);

/// Right-hand side of the discrete gain-phase relation
///   -sin(w_p)/pi * int_0^pi (A(w) - A(w_p))/(cos w - cos w_p) dw,
/// with A(w) = ln|f(e^{jw})|. For real minimum-phase f this reproduces
/// theta_f(w_p) in the e^{+jw} convention.
double gain_phase_integral(const RationalTF& f, double omega_p);

struct Lemma6Result {
  double omega_p = 0.0;
  double theta = 0.0;
  double rate = 0.0;
  double interior_bound = 0.0;
  bool interior = false;
  bool holds_nonpositive = false;
  bool holds_interior = false;
  bool holds() const { return holds_nonpositive && (!interior || holds_interior); }
};

/// theta_f(w_p) and theta_f'(w_p) bounds at the peak-gain frequency of a minimum-phase f.
Lemma6Result lemma6_bound_check(const RationalTF& f);

bool is_minimum_phase(const RationalTF& f);

}  // namespace rirkit
