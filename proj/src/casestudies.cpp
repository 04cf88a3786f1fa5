#include "rirkit/casestudies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rirkit/error.hpp"

namespace rirkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Re d/dw log g(e^{jw}) from the root sets.
double gain_rate_roots(const RationalTF& g, double w) {
  const cplx z = std::polar(1.0, w);
  cplx s{0.0, 0.0};
  for (cplx q : g.zeros()) s += 1.0 / (z - q);
  for (cplx q : g.poles()) s -= 1.0 / (z - q);
  return (cplx{0.0, 1.0} * z * s).real();
}

}  // namespace

// ---- maglev ----------------------------------------------------------------

void MaglevParams::validate() const {
  if (!(k > 0.0 && p > 0.0 && tau > 0.0 && T > 0.0)) {
    throw InvalidInput("maglev parameters k, p, tau, T must be positive");
  }
  if (std::abs(tau * p - 1.0) < 1e-12) throw InvalidInput("maglev parameters: tau p = 1");
}

MaglevCoefficients maglev_coefficients(const MaglevParams& prm) {
  prm.validate();
  // beta2 = N1 + N2 + N3 is O(T^3) while each N_i is O(T); assembled in
  // extended precision.
  using ld = long double;
  const ld p = prm.p, tau = prm.tau, T = prm.T;
  const ld E1 = std::exp(p * T), E2 = std::exp(-p * T), E3 = std::exp(-T / tau);
  const ld N1 = -std::expm1(p * T) / (2 * (tau * p + 1));
  const ld N2 = std::expm1(-p * T) / (2 * (tau * p - 1));
  const ld N3 = tau * tau * p * p * -std::expm1(-T / tau) / (tau * tau * p * p - 1);
  MaglevCoefficients c;
  c.E1 = static_cast<double>(E1);
  c.E2 = static_cast<double>(E2);
  c.E3 = static_cast<double>(E3);
  c.N1 = static_cast<double>(N1);
  c.N2 = static_cast<double>(N2);
  c.N3 = static_cast<double>(N3);
  c.beta2 = static_cast<double>(N1 + N2 + N3);
  c.beta1 = static_cast<double>(-(E2 * (N1 + N3) + E1 * (N2 + N3) + E3 * (N1 + N2)));
  c.beta0 = static_cast<double>(N1 * std::exp(-(p * T + T / tau)) + N2 * std::exp(p * T - T / tau) + N3);
  return c;
}

cplx maglev_partial_fraction(const MaglevParams& prm, cplx z) {
  const MaglevCoefficients c = maglev_coefficients(prm);
  const double s = prm.k / (prm.p * prm.p);
  return s * (c.N1 / (z - c.E1) + c.N2 / (z - c.E2) + c.N3 / (z - c.E3));
}

double maglev_dc_gain(const MaglevParams& prm) {
  const MaglevCoefficients c = maglev_coefficients(prm);
  const double p = prm.p, T = prm.T;
  const double s = prm.k / (p * p);
  // 1 - E_i = -expm1(.)
  return s * (c.N1 / -std::expm1(p * T) + c.N2 / -std::expm1(-p * T) +
              c.N3 / -std::expm1(-T / prm.tau));
}

RationalTF maglev_zoh(const MaglevParams& prm) {
  const MaglevCoefficients c = maglev_coefficients(prm);
  const double s = prm.k / (prm.p * prm.p);
  // Poles are kept as computed; re-rooting the cubic would perturb the pair
  // e^{+-pT} near z = 1.
  const Polynomial num({c.beta2, c.beta1, c.beta0});
  RationalTF g = RationalTF::from_zpk(root_list(num), {c.E1, c.E2, c.E3}, s * c.beta2);

  // Compared against the size of the individual partial fractions, which
  // cancel heavily far from z = 1 and at z = 1 itself.
  const cplx probes[] = {{-1.0, 0.0}, {0.0, 2.0}, {0.5, 0.5}, {0.3, -0.9}, {3.0, 0.0}};
  for (cplx z : probes) {
    const cplx a = g(z);
    const cplx b = maglev_partial_fraction(prm, z);
    const double scale = s * (std::abs(c.N1 / (z - c.E1)) + std::abs(c.N2 / (z - c.E2)) +
                              std::abs(c.N3 / (z - c.E3)));
    if (std::abs(a - b) > 1e-10 * scale) {
      throw VerificationError("maglev_zoh: partial-fraction and product forms differ by " +
                              fmt(std::abs(a - b) / scale));
    }
  }
  return g;
}

RationalTF highpass(double a, double b) {
  if (!(b > a && a > 0.0)) throw InvalidInput("highpass requires b > a > 0");
  RationalTF f({b + 1.0, 1.0 - b}, {a + 1.0, 1.0 - a});
  if (std::abs((a - 1.0) / (a + 1.0)) >= 1.0) throw NumericalError("highpass pole not in D");
  return f;
}

MaglevBound maglev_upper_bound(const MaglevParams& prm, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("maglev_upper_bound needs eps > 0");
  const RationalTF gd = maglev_zoh(prm);
  const MaglevCoefficients c = maglev_coefficients(prm);
  const double p = prm.p, T = prm.T, tau = prm.tau;

  MaglevBound r;
  r.theta_rate0 = logderiv(gd, 0.0).phase_rate;
  if (r.theta_rate0 >= 0.0) {
    throw PreconditionError("compensation unnecessary: theta'_{g_d}(0) = " + fmt(r.theta_rate0));
  }
  r.P = -2.0 * r.theta_rate0 + eps;
  const double e3 = std::exp(-T / tau);
  const double bs = c.beta2 + c.beta1 + c.beta0;
  r.abar = (8.0 / (std::exp(p * T) + std::exp(-p * T) - 2.0) +
            4.0 * e3 / ((1.0 - e3) * (1.0 - e3)) +
            4.0 * (4.0 * c.beta2 * c.beta0 + c.beta2 * c.beta1 + c.beta1 * c.beta0) / (bs * bs) -
            r.P * r.P) /
           (2.0 * r.P);
  if (!(r.abar > 0.0)) throw NumericalError("maglev_upper_bound: abar = " + fmt(r.abar));
  r.ratio = 1.0 + r.P / r.abar;

  r.a = r.abar * (1.0 - 1e-6);
  r.b = r.a + r.P;
  const RationalTF gc = gd * highpass(r.a, r.b);
  r.max_gain_rate = -std::numeric_limits<double>::infinity();
  auto probe = [&](double w) {
    const double v = gain_rate_roots(gc, w);
    if (v > r.max_gain_rate) {
      r.max_gain_rate = v;
      r.max_gain_rate_omega = w;
    }
  };
  constexpr int kLog = 20000, kLin = 100000;
  const double l0 = std::log(1e-9), l1 = std::log(1e-2);
  for (int i = 0; i < kLog; ++i) probe(std::exp(l0 + (l1 - l0) * i / (kLog - 1)));
  for (int i = 0; i <= kLin; ++i) probe(1e-2 + (kPi - 1e-2) * i / kLin);
  r.compensated_rate0 = logderiv(gc, 0.0).phase_rate;
  r.validated = r.max_gain_rate <= 1e-9 && r.compensated_rate0 > 0.0;
  return r;
}

double maglev_tau_limit(double p, double T, double eps) {
  const double kappa = (2.0 - std::exp(p * T) - std::exp(-p * T)) / 2.0;
  const double one = 1.0 + eps;
  return 2.0 * one * one / (1.0 - 4.0 / kappa - one * one);
}

// ---- FHN -------------------------------------------------------------------

double FHNModel::A() const { return std::exp(tau / c); }
double FHNModel::B() const { return std::exp(-beta * tau / d); }
double FHNModel::D() const { return 1.0 / beta; }
double FHNModel::den(double x) const { return 1.0 + (A() - 1.0) * x * x / 3.0; }

void FHNModel::validate() const {
  if (!(c > 0.0 && beta > 0.0 && tau > 0.0 && d > 0.0)) {
    throw InvalidInput("FHN parameters c, beta, tau, d must be positive");
  }
  if (!std::isfinite(alpha) || !std::isfinite(I)) throw InvalidInput("FHN parameters must be finite");
}

FixedPoint fhn_fixed_point(const FHNModel& m, double e) {
  m.validate();
  const double D = m.D();
  const double ke = (1.0 + e) * D;
  auto f = [&](double x) { return x * x * x / 3.0 - x + ke * (x + m.alpha) - m.I; };
  auto df = [&](double x) { return x * x - 1.0 + ke; };
  for (double x : {-2.0, -1.0, 0.0, 1.0}) {
    bool ok = false;
    for (int it = 0; it < 100; ++it) {
      const double d = df(x);
      if (d == 0.0) break;
      const double step = f(x) / d;
      x -= step;
      if (!std::isfinite(x)) break;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) {
        ok = true;
        break;
      }
    }
    if (!ok || !std::isfinite(x) || std::abs(f(x)) >= 1e-12) continue;
    FixedPoint fp;
    fp.xbar = x;
    fp.ybar = D * (x + m.alpha);
    fp.e = e;
    fp.residual = std::abs(f(x));
    return fp;
  }
  throw NumericalError("fhn_fixed_point: Newton did not converge from any start");
}

Jacobian2 fhn_jacobian(const FHNModel& m, const FixedPoint& fp) {
  const double A = m.A(), B = m.B(), D = m.D();
  const double x = fp.xbar, y = fp.ybar;
  const double dn = m.den(x);
  const double ddn = 2.0 * (A - 1.0) * x / 3.0;
  Jacobian2 J;
  J.a11 = A / dn - (A * x + (1.0 - A) * (y - m.I)) * ddn / (dn * dn);
  J.a12 = (1.0 - A) / dn;
  J.a21 = D * (1.0 - B);
  J.a22 = B;
  J.kx = -(1.0 - A) * y * ddn / (dn * dn);
  J.ky = (1.0 - A) / dn;
  return J;
}

Jacobian2 fhn_jacobian_fd(const FHNModel& m, const FixedPoint& fp, double h) {
  const double A = m.A(), B = m.B(), D = m.D();
  auto fx = [&](double x, double y) { return (A * x + (1.0 - A) * (y - m.I)) / m.den(x); };
  auto fy = [&](double x, double y) { return B * y + D * (1.0 - B) * (x + m.alpha); };
  auto v = [&](double x, double y) { return (1.0 - A) * y / m.den(x); };
  const double x = fp.xbar, y = fp.ybar;
  Jacobian2 J;
  J.a11 = (fx(x + h, y) - fx(x - h, y)) / (2 * h);
  J.a12 = (fx(x, y + h) - fx(x, y - h)) / (2 * h);
  J.a21 = (fy(x + h, y) - fy(x - h, y)) / (2 * h);
  J.a22 = (fy(x, y + h) - fy(x, y - h)) / (2 * h);
  J.kx = (v(x + h, y) - v(x - h, y)) / (2 * h);
  J.ky = (v(x, y + h) - v(x, y - h)) / (2 * h);
  return J;
}

RationalTF fhn_linearize(const FHNModel& m, double e) {
  const FixedPoint fp = fhn_fixed_point(m, e);
  const Jacobian2 J = fhn_jacobian(m, fp);
  const Jacobian2 F = fhn_jacobian_fd(m, fp);
  const double a[] = {J.a11, J.a12, J.a21, J.a22, J.kx, J.ky};
  const double b[] = {F.a11, F.a12, F.a21, F.a22, F.kx, F.ky};
  for (int i = 0; i < 6; ++i) {
    if (std::abs(a[i] - b[i]) > 1e-6 * std::max(std::abs(a[i]), 1e-8)) {
      throw VerificationError("fhn_linearize: Jacobian entry " + std::to_string(i) +
                              " disagrees with finite differences");
    }
  }
  // [kx ky] adj(zI - J) [1 0]^T over det(zI - J)
  const std::vector<double> num{J.kx, -J.kx * J.a22 + J.ky * J.a21};
  const std::vector<double> den{1.0, -(J.a11 + J.a22), J.a11 * J.a22 - J.a12 * J.a21};
  if (num[0] == 0.0 && num[1] == 0.0) throw NumericalError("fhn_linearize: zero loop transfer");
  return RationalTF(num, den);
}

FHNSearch fhn_search_eo(const FHNModel& m, double sweep_step) {
  if (!(sweep_step > 0.0 && sweep_step <= 0.5)) throw InvalidInput("sweep step must lie in (0, 0.5]");
  auto inv_norm = [&](double e) { return 1.0 / linf_norm(fhn_linearize(m, e)).norm; };
  auto h = [&](double e) { return std::abs(e) - inv_norm(e); };

  FHNSearch s;
  const int half = static_cast<int>(std::floor(0.5 / sweep_step + 1e-9));
  for (int i = -half; i <= half; ++i) {
    const double e = i * sweep_step;
    s.sweep.push_back({e, inv_norm(e)});
  }

  const double h0 = h(0.0);
  if (h0 == 0.0) throw PreconditionError("fhn_search_eo: ||g_0|| is infinite");
  double lo = 0.0, hi = 0.0;
  bool found = false;
  for (int k = 1; k <= half && !found; ++k) {
    for (int sgn : {-1, 1}) {
      const double e = sgn * k * sweep_step;
      if ((h(e) > 0.0) != (h0 > 0.0)) {
        lo = sgn * (k - 1) * sweep_step;
        hi = e;
        found = true;
        break;
      }
    }
  }
  if (!found) throw NumericalError("fhn_search_eo: no bracket found in e in [-0.5, 0.5]");
  double hlo = h(lo);
  while (std::abs(hi - lo) > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double hm = h(mid);
    if ((hm > 0.0) == (hlo > 0.0)) {
      lo = mid;
      hlo = hm;
    } else {
      hi = mid;
    }
  }
  s.e_o = 0.5 * (lo + hi);
  s.fixed_point = fhn_fixed_point(m, s.e_o);
  s.g_eo = fhn_linearize(m, s.e_o);
  const PeakInfo pk = linf_norm(s.g_eo);
  s.inv_norm = 1.0 / pk.norm;
  s.omega_p = pk.omega;
  s.analysis = exact_rir_analyze(s.g_eo);
  if (s.analysis.status != RIRStatus::exact_sufficient) {
    throw VerificationError("fhn_search_eo: g_eo is " + to_string(s.analysis.status) +
                            ", not exact_sufficient");
  }
  return s;
}

RationalTF h_shaper(double eps, double omega_p, double r) {
  if (eps == -1.0) throw InvalidInput("h_shaper: eps = -1");
  if (!(omega_p > 0.0 && omega_p <= kPi)) throw InvalidInput("h_shaper: omega_p must lie in (0, pi]");
  if (!(std::abs(r) < 1.0)) throw InvalidInput("h_shaper: |r| must be < 1");
  const double cw = std::cos(omega_p);
  const double mu = -eps / (1.0 + eps) * (1.0 - r) * (1.0 - r) / (2.0 - 2.0 * cw);
  const Polynomial d({1.0, -2.0 * r, r * r});
  const Polynomial n = d + mu * Polynomial({1.0, -2.0 * cw, 1.0});
  return RationalTF(n, d);
}

FHNPerturbation fhn_perturbation(double e_o, const RationalTF& g_eo, double eps, double r) {
  FHNPerturbation p;
  p.synth = synth_marginal_perturbation(g_eo);
  p.delta_f = p.synth.f;
  const double df1 = p.delta_f(cplx{1.0, 0.0}).real();
  if ((df1 < 0.0) != (e_o < 0.0) || std::abs(df1 - e_o) > 1e-8 * std::max(1.0, std::abs(e_o))) {
    throw VerificationError("fhn_perturbation: delta_f(1) = " + fmt(df1) + " but e_o = " + fmt(e_o));
  }
  p.h = h_shaper(eps, p.synth.analysis.cls.peak_omega, r);
  p.delta = (1.0 + eps) * (p.h * p.delta_f);
  p.dc = p.delta(cplx{1.0, 0.0}).real();
  if (std::abs(p.dc - df1) > 1e-10) {
    throw VerificationError("fhn_perturbation: DC gain moved by " + fmt(std::abs(p.dc - df1)));
  }
  return p;
}

Trajectory fhn_simulate(const FHNModel& m, const RationalTF& delta, int steps, double x0,
                        double y0, const SimOptions& opts) {
  m.validate();
  if (steps < 0) throw InvalidInput("steps must be non-negative");
  for (cplx q : delta.poles()) {
    if (std::abs(q) >= 1.0) throw InvalidInput("fhn_simulate: delta must be stable");
  }
  const double A = m.A(), B = m.B(), D = m.D();

  // Transposed direct form II on normalized coefficients.
  std::vector<double> b = delta.num().coeffs();
  std::vector<double> a = delta.den().coeffs();
  const bool active = !delta.is_zero();
  const std::size_t n = a.size();
  b.insert(b.begin(), n - b.size(), 0.0);
  const double a0 = a[0];
  for (double& v : a) v /= a0;
  for (double& v : b) v /= a0;
  std::vector<double> s(n - 1, 0.0);
  if (active && n > 1) {
    const double e = delta(cplx{1.0, 0.0}).real();
    const FixedPoint fp = fhn_fixed_point(m, e);
    const double vbar = (1.0 - A) * fp.ybar / m.den(fp.xbar);
    const double wbar = e * vbar;
    for (std::size_t i = n - 1; i-- > 0;) {
      s[i] = b[i + 1] * vbar - a[i + 1] * wbar + (i + 1 < n - 1 ? s[i + 1] : 0.0);
    }
  }

  Trajectory tr;
  tr.x.reserve(steps);
  tr.y.reserve(steps);
  double x = x0, y = y0;
  for (int k = 0; k < steps; ++k) {
    double w = 0.0;
    if (active) {
      const double v = (1.0 - A) * y / m.den(x);
      w = b[0] * v + (n > 1 ? s[0] : 0.0);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        s[i] = b[i + 1] * v - a[i + 1] * w + (i + 2 < n ? s[i + 1] : 0.0);
      }
    }
    const double xn = (A * x + (1.0 - A) * (y - m.I)) / m.den(x) + w;
    y = B * y + D * (1.0 - B) * (x + m.alpha);
    x = xn;
    if (!std::isfinite(x) || !std::isfinite(y) || std::abs(x) > opts.divergence) {
      tr.diverged = true;
      break;
    }
    tr.x.push_back(x);
    tr.y.push_back(y);
    if (opts.record_state) tr.state.push_back(s);
  }
  return tr;
}

std::string to_string(Oscillation o) {
  switch (o) {
    case Oscillation::oscillating: return "oscillating";
    case Oscillation::converged: return "converged";
    case Oscillation::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

OscillationReport oscillation_amplitude(const std::vector<double>& x, double hi, double lo) {
  OscillationReport r;
  if (x.empty()) return r;
  const std::size_t q = std::max<std::size_t>(1, x.size() / 4);
  const auto [mn, mx] = std::minmax_element(x.end() - q, x.end());
  r.amplitude = *mx - *mn;
  if (r.amplitude > hi) {
    r.verdict = Oscillation::oscillating;
  } else if (r.amplitude < lo) {
    r.verdict = Oscillation::converged;
  }
  return r;
}

}  // namespace rirkit
