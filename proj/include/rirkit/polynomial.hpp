#pragma once

#include <complex>
#include <span>
#include <vector>

namespace rirkit {

using cplx = std::complex<double>;

/// Real polynomial with coefficients stored in descending powers of z.
///
/// Leading coefficients whose magnitude is at most `trim_tol` times the
/// largest coefficient are dropped on construction. The zero polynomial is
/// kept as the single coefficient 0 and reports `is_zero()`.
class Polynomial {
 public:
  static constexpr double kDefaultTrimTol = 1e-12;

  Polynomial() : coeffs_{0.0}, zero_(true) {}
  explicit Polynomial(std::vector<double> coeffs,
                      double trim_tol = kDefaultTrimTol);

  static Polynomial constant(double c) { return Polynomial({c}); }
  // leading * prod (z - r_i). `roots` must be closed under conjugation.
  static Polynomial from_roots(std::span<const cplx> roots,
                               double leading = 1.0);

  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool is_zero() const { return zero_; }
  double leading() const { return coeffs_.front(); }
  double max_abs_coeff() const;

  cplx operator()(cplx z) const;
  double operator()(double x) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double s, const Polynomial& p);

 private:
  std::vector<double> coeffs_;
  bool zero_ = false;
};

/// Horner evaluation; exact for degree 0.
cplx eval(const Polynomial& p, cplx z);

/// Formal derivative. A degree-0 input gives the zero polynomial.
Polynomial derivative(const Polynomial& p);

struct Root {
  cplx value;
  int multiplicity = 1;
};

struct RootSet {
  std::vector<Root> roots;
  double residual = 0.0;  // max |p(r)| over the returned roots

  int count() const;
  // Roots repeated according to multiplicity.
  std::vector<cplx> expanded() const;
};

struct RootOptions {
  int max_iterations = 500;
  double cluster_tol = 1e-6;  // multiplicity detection, scaled by 1+|z|
  double pairing_tol = 1e-9;  // conjugate pairing / realness snapping
};

/// All complex roots via Aberth-Ehrlich simultaneous iteration, with a
/// Laguerre deflation fallback when the iteration stagnates.
/// Throws InvalidInput for the zero polynomial ("undefined roots") and for
/// degree 0.
RootSet roots(const Polynomial& p, const RootOptions& opts = {});

/// Unclustered roots (multiplicity expanded), conjugate-symmetric.
std::vector<cplx> root_list(const Polynomial& p, const RootOptions& opts = {});

}  // namespace rirkit
