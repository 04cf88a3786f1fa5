#pragma once

#include <span>
#include <string>
#include <vector>

#include "rirkit/polynomial.hpp"

namespace rirkit {

/// Proper real-rational transfer function num(z)/den(z).
///
/// Construction rejects improper or zero-denominator input, computes the
/// pole and zero sets once, and cancels numerator/denominator roots closer
/// than `kCancelTol`. Frequency-domain quantities are evaluated from the
/// factored form; it stays accurate when poles sit close to z = 1.
class RationalTF {
 public:
  static constexpr double kCancelTol = 1e-8;

  RationalTF(Polynomial num, Polynomial den);
  RationalTF(std::vector<double> num, std::vector<double> den)
      : RationalTF(Polynomial(std::move(num)), Polynomial(std::move(den))) {}

  static RationalTF constant(double c);
  // gain * prod(z - zeros) / prod(z - poles); sets must be conjugate-closed.
  static RationalTF from_zpk(std::vector<cplx> zeros, std::vector<cplx> poles,
                             double gain);

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }
  std::span<const cplx> zeros() const { return zeros_; }
  std::span<const cplx> poles() const { return poles_; }
  // Ratio of leading coefficients.
  double gain() const { return gain_; }
  bool is_zero() const { return num_.is_zero(); }
  bool strictly_proper() const { return num_.degree() < den_.degree(); }
  int order() const { return den_.degree(); }

  /// num(z)/den(z). Throws InvalidInput when z hits a pole.
  cplx operator()(cplx z) const;

  friend RationalTF operator*(const RationalTF& a, const RationalTF& b);
  friend RationalTF operator*(double s, const RationalTF& g);

 private:
  RationalTF(Polynomial num, Polynomial den, std::vector<cplx> zeros,
             std::vector<cplx> poles);
  void cancel_common_roots();

  Polynomial num_;
  Polynomial den_;
  std::vector<cplx> zeros_;
  std::vector<cplx> poles_;
  double gain_ = 0.0;
};

cplx evaluate(const RationalTF& g, cplx z);

/// Distance from the closest pole to the unit circle.
double pole_distance_to_circle(const RationalTF& g);
/// Distance from the closest pole or zero to the unit circle.
double root_distance_to_circle(const RationalTF& g);

/// Poles with |z| > 1, counted with multiplicity.
/// Throws InvalidInput("not in RL-infinity") when a pole lies within
/// `circle_tol` of the unit circle.
int unstable_pole_count(const RationalTF& g, double circle_tol = 1e-9);

/// Parity interlacing property. Real unstable zeros (plus the zero at
/// infinity of a strictly proper g) are ordered along the image of the
/// unstable real axis under s = (z-1)/(z+1); every gap between consecutive
/// zeros must hold an even number of real unstable poles.
bool pip_check(const RationalTF& g);

/// Log-gain, unwrapped phase and their frequency derivatives at one omega.
struct DerivativeSample {
  double omega = 0.0;
  cplx value;
  double gain_log = 0.0;    // A(w) = ln|g(e^{jw})|
  double phase = 0.0;       // theta(w), continuous, anchored at w = 0
  double gain_rate = 0.0;   // A'(w)
  double phase_rate = 0.0;  // theta'(w)
};

/// Throws InvalidInput if a pole or zero of g lies on e^{jw}.
DerivativeSample logderiv(const RationalTF& g, double omega);

/// Continuous phase of g(e^{jw}) with theta(0) taken as the principal value
/// of arg g(1).
double unwrapped_phase(const RationalTF& g, double omega);

struct NormOptions {
  int grid = 4096;
  int dense_grid = 1 << 14;
  double densify_distance = 1e-2;
  double uniqueness_margin = 1e-6;
};

struct PeakInfo {
  double norm = 0.0;
  double omega = 0.0;
  bool unique = true;
  // Runner-up local maximum (0 when none exists).
  double second_peak = 0.0;
};

/// sup over [0, pi] of |g(e^{jw})|. Dense grid plus pole-angle seeds, then
/// bisection on A'(w) around the best three local maxima.
PeakInfo linf_norm(const RationalTF& g, const NormOptions& opts = {});

enum class GClass { G1_boundary, G2_interior, G1_interior, Gn_other };

std::string to_string(GClass c);

struct ClassTag {
  int n_unstable = 0;
  bool pip = false;
  double peak_omega = 0.0;
  double peak_gain = 0.0;
  bool peak_unique = false;
  GClass class_name = GClass::Gn_other;

  bool boundary_peak() const;
};

/// Throws PreconditionError("not in G") for g without unstable poles.
ClassTag classify(const RationalTF& g, const NormOptions& opts = {});

}  // namespace rirkit
