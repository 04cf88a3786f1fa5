#include "rirkit/rir.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rirkit/error.hpp"

namespace rirkit {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double wrap_pi(double x) {
  const double r = std::remainder(x, 2.0 * kPi);
  return r <= -kPi ? r + 2.0 * kPi : r;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

RIRStatus trichotomy(double diff, double tol) {
  if (diff > tol) return RIRStatus::exact_sufficient;
  if (diff < -tol) return RIRStatus::not_exact;
  return RIRStatus::exact_boundary;
}

// Stable all-pass section with real coefficients, evaluated at one point.
struct Section {
  std::vector<double> num;
  std::vector<double> den;
};

void section_eval(const Section& s, cplx u, cplx& value, double& rate) {
  auto horner = [&](const std::vector<double>& c, cplx& p, cplx& dp) {
    p = c[0];
    dp = 0.0;
    for (std::size_t k = 1; k < c.size(); ++k) {
      dp = dp * u + p;
      p = p * u + c[k];
    }
  };
  cplx n, dn, d, dd;
  horner(s.num, n, dn);
  horner(s.den, d, dd);
  value = n / d;
  rate = (u * (dn / n - dd / d)).real();
}

}  // namespace

std::string to_string(RIRStatus s) {
  switch (s) {
    case RIRStatus::exact_sufficient: return "exact_sufficient";
    case RIRStatus::exact_boundary: return "exact_boundary";
    case RIRStatus::not_exact: return "not_exact";
    case RIRStatus::strictly_greater: return "strictly_greater";
    case RIRStatus::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

double rho_threshold(double omega_p, double theta_p) {
  if (!(omega_p > 0.0 && omega_p < kPi)) {
    throw InvalidInput("rho threshold needs omega_p in (0, pi)");
  }
  return std::abs(std::sin(theta_p) / std::sin(omega_p));
}

RIRVerdict exact_rir_analyze(const RationalTF& g, const AnalyzeOptions& opts) {
  RIRVerdict v;
  v.cls = classify(g, opts.norm);
  const DerivativeSample d = logderiv(g, v.cls.peak_omega);
  v.theta_p = wrap_pi(d.phase);
  v.theta_rate = d.phase_rate;
  v.lower_bound = 1.0 / v.cls.peak_gain;
  const bool boundary = v.cls.boundary_peak();
  if (!boundary) v.rho = rho_threshold(v.cls.peak_omega, v.theta_p);

  switch (v.cls.class_name) {
    case GClass::G1_boundary:
      v.status = trichotomy(v.theta_rate, opts.rate_tol);
      v.explanation = "G1 boundary peak: theta'(w_p) against 0";
      break;
    case GClass::G2_interior:
      v.status = trichotomy(v.theta_rate - v.rho, opts.rate_tol);
      v.explanation = "G2 interior peak: theta'(w_p) against rho(w_p)";
      break;
    case GClass::G1_interior:
      v.status = RIRStatus::strictly_greater;
      v.explanation = "one unstable pole with interior peak";
      break;
    case GClass::Gn_other:
      if (v.cls.pip && v.cls.peak_unique && !boundary && v.cls.n_unstable % 2 == 1) {
        v.status = RIRStatus::strictly_greater;
        v.explanation = "odd number of unstable poles with interior peak";
      } else if (!v.cls.pip) {
        v.explanation = "parity interlacing fails: no stable stabilizer exists";
      } else if (!v.cls.peak_unique) {
        v.explanation = "peak gain is not unique";
      } else {
        v.explanation = "n = " + std::to_string(v.cls.n_unstable) +
                        ": marginal stability cannot be of single mode";
      }
      break;
  }
  return v;
}

RationalTF AllPassSpec::tf() const {
  const double k = scale * c;
  if (constant) return RationalTF::constant(k);
  return RationalTF({k * a, k}, {1.0, a});
}

double first_order_phase(double a, double omega) {
  const cplx u = std::polar(1.0, omega);
  return std::arg((a * u + 1.0) / (u + a));
}

double first_order_rate(double a, double omega) {
  return (a * a - 1.0) / std::norm(std::polar(1.0, omega) + a);
}

AllPassSpec allpass_phase_match(double omega_p, double theta_p) {
  if (!(omega_p > 0.0 && omega_p < kPi)) {
    throw InvalidInput("phase matching needs omega_p in (0, pi)");
  }
  AllPassSpec s;
  const double th = wrap_pi(theta_p);
  if (std::abs(th) <= 1e-14) {
    s.constant = true;
    s.c = 1;
    return s;
  }
  if (th >= kPi - 1e-14) {
    s.constant = true;
    s.c = -1;
    return s;
  }
  s.c = th < 0.0 ? 1 : -1;
  const double target = th < 0.0 ? th : th - kPi;  // in (-pi, 0)
  // The phase decreases from 0 to -pi as a runs from 1 to -1.
  double lo = -1.0, hi = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double m = 0.5 * (lo + hi);
    if (m <= lo || m >= hi) break;
    if (first_order_phase(m, omega_p) > target) {
      hi = m;
    } else {
      lo = m;
    }
  }
  const double elo = std::abs(first_order_phase(lo, omega_p) - target);
  const double ehi = std::abs(first_order_phase(hi, omega_p) - target);
  s.a = elo <= ehi ? lo : hi;
  const double sin_id = (s.a * s.a - 1.0) * std::sin(omega_p) /
                        std::norm(std::polar(1.0, omega_p) + s.a);
  if (std::abs(sin_id - std::sin(first_order_phase(s.a, omega_p))) > 1e-9) {
    throw VerificationError("first-order all-pass sine identity violated");
  }
  return s;
}

SynthResult synth_marginal_perturbation(const RationalTF& g, const AnalyzeOptions& opts) {
  SynthResult r;
  r.analysis = exact_rir_analyze(g, opts);
  if (r.analysis.status != RIRStatus::exact_sufficient) {
    throw PreconditionError("synthesis needs exact_sufficient, got " +
                            to_string(r.analysis.status) + " (" +
                            r.analysis.explanation + ")");
  }
  const double wp = r.analysis.cls.peak_omega;
  const double scale = r.analysis.lower_bound;
  if (r.analysis.cls.boundary_peak()) {
    r.spec.constant = true;
    r.spec.c = g(std::polar(1.0, wp)).real() >= 0.0 ? 1 : -1;
  } else {
    r.spec = allpass_phase_match(wp, -r.analysis.theta_p);
  }
  r.spec.scale = scale;
  r.f = r.spec.tf();
  r.f_norm = linf_norm(r.f).norm;
  const RationalTF L = g * r.f;
  r.loop_at_peak = L(std::polar(1.0, wp));

  std::string why;
  if (std::abs(r.f_norm - scale) > 1e-9 * std::max(1.0, scale)) {
    why = "||f|| = " + fmt(r.f_norm) + " differs from 1/||g|| = " + fmt(scale);
  } else if (std::abs(r.loop_at_peak - 1.0) > 1e-6) {
    why = "L(e^{jw_p}) - 1 = " + fmt(std::abs(r.loop_at_peak - 1.0));
  } else {
    r.verdict = marginal_verdict(L, wp);
    if (!r.verdict.single_mode) {
      why = "closed loop is not single-mode marginally stable (max |root| = " +
            fmt(r.verdict.max_root_modulus) + ")";
    }
  }
  if (!why.empty()) throw VerificationError("synthesis verification failed: " + why);
  return r;
}

UniformStream::UniformStream(std::uint64_t seed) : eng_(seed) {}

double UniformStream::next() {
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

PcrSearchResult pcr_max_search(double omega_p, double theta_p, int max_order,
                               int trials, std::uint64_t seed) {
  if (max_order < 0 || max_order > 6) throw InvalidInput("max_order must lie in [0, 6]");
  if (trials < 0) throw InvalidInput("trials must be non-negative");
  if (omega_p < 0.0 || omega_p > kPi) throw InvalidInput("omega_p must lie in [0, pi]");
  const bool edge = omega_p == 0.0 || omega_p == kPi;
  const double th = wrap_pi(theta_p);
  if (edge && std::abs(std::sin(th)) > 1e-12) {
    throw InvalidInput("at w = 0 or pi the phase of a real function is 0 or pi");
  }

  PcrSearchResult res;
  res.bound = edge ? 0.0 : -rho_threshold(omega_p, th);
  res.best = -kInf;
  const cplx u = std::polar(1.0, omega_p);

  std::vector<Section> best_sections;
  int best_c = 1;

  auto consider = [&](double rate, const std::vector<Section>& secs, int c) {
    ++res.evaluated;
    if (!std::isfinite(rate)) {
      ++res.skipped;
      return;
    }
    if (rate > res.best) {
      res.best = rate;
      best_sections = secs;
      best_c = c;
    }
  };

  // Order 0: a constant is feasible only when the phase is 0 or pi.
  if (std::abs(std::sin(th)) <= 1e-14) consider(0.0, {}, std::cos(th) > 0 ? 1 : -1);

  UniformStream rng(seed);
  for (int t = 0; t < trials && max_order >= 1; ++t) {
    const int order = 1 + static_cast<int>(rng.next() * max_order);
    std::vector<Section> secs;
    int remaining = order - 1;
    while (remaining > 0) {
      if (remaining >= 2 && rng.next() < 0.5) {
        const double alpha = rng.between(0.0, 1.0);
        const double beta = 2.0 * std::sqrt(alpha) * rng.between(-1.0, 1.0);
        if (alpha <= 0.0 || beta * beta >= 4.0 * alpha) continue;
        secs.push_back({{alpha, beta, 1.0}, {1.0, beta, alpha}});
        remaining -= 2;
      } else {
        const double a = rng.between(-1.0, 1.0);
        if (std::abs(a) >= 1.0) continue;
        secs.push_back({{a, 1.0}, {1.0, a}});
        remaining -= 1;
      }
    }
    double phase = 0.0, rate = 0.0;
    for (const auto& s : secs) {
      cplx v;
      double r;
      section_eval(s, u, v, r);
      phase += std::arg(v);
      rate += r;
    }
    const double residual = wrap_pi(th - phase);
    int c = 1;
    if (edge) {
      // Any first-order section takes the value +-1 here; the sign fixes it.
      const double a = rng.between(-1.0, 1.0);
      Section free{{a, 1.0}, {1.0, a}};
      cplx v;
      double r;
      section_eval(free, u, v, r);
      c = std::cos(residual) * v.real() > 0.0 ? 1 : -1;
      secs.push_back(free);
      consider(rate + r, secs, c);
      continue;
    }
    AllPassSpec m;
    try {
      m = allpass_phase_match(omega_p, residual);
    } catch (const Error&) {
      // One sign flip retry.
      try {
        m = allpass_phase_match(omega_p, wrap_pi(residual + kPi));
        m.c = -m.c;
      } catch (const Error&) {
        ++res.skipped;
        continue;
      }
    }
    c = m.c;
    if (!m.constant) {
      secs.push_back({{m.a, 1.0}, {1.0, m.a}});
      rate += first_order_rate(m.a, omega_p);
    }
    consider(rate, secs, c);
  }

  if (res.best == -kInf) {
    throw NumericalError("pcr search found no feasible candidate");
  }

  // Re-verify the winner through the general transfer machinery.
  RationalTF f = RationalTF::constant(static_cast<double>(best_c));
  std::ostringstream desc;
  desc.precision(10);
  desc << "c=" << best_c;
  for (const auto& s : best_sections) {
    f = f * RationalTF(s.num, s.den);
    if (s.num.size() == 2) {
      desc << " first(a=" << s.num[0] << ")";
    } else {
      desc << " second(alpha=" << s.num[0] << ",beta=" << s.num[1] << ")";
    }
  }
  res.description = desc.str();
  if (!best_sections.empty()) {
    const DerivativeSample d = logderiv(f, omega_p);
    const double scale = std::max(1.0, std::abs(res.best));
    if (std::abs(d.phase_rate - res.best) > 1e-9 * scale ||
        std::abs(wrap_pi(d.phase - th)) > 1e-9) {
      throw VerificationError("pcr search winner failed re-verification");
    }
  }
  return res;
}

Lemma4Result lemma4_bound_check(const RationalTF& f, double omega_p) {
  if (!(std::abs(omega_p) > 0.0 && std::abs(omega_p) < kPi)) {
    throw InvalidInput("lemma4_bound_check needs omega_p outside {0, pi}");
  }
  for (const auto& p : f.poles()) {
    if (p.imag() != 0.0) throw InvalidInput("lemma4_bound_check needs real poles");
    if (std::abs(p) >= 1.0) throw InvalidInput("lemma4_bound_check needs a stable all-pass");
  }
  for (int k = 0; k < 16; ++k) {
    const double w = kPi * (k + 0.5) / 16.0;
    if (std::abs(std::abs(f(std::polar(1.0, w))) - 1.0) > 1e-9) {
      throw InvalidInput("lemma4_bound_check needs a unit-gain all-pass");
    }
  }
  Lemma4Result r;
  r.order = f.order();
  const DerivativeSample d = logderiv(f, omega_p);
  r.rate = d.phase_rate;
  r.bound = -std::abs(std::sin(d.phase) / std::sin(omega_p));
  const double tol = 1e-10 * std::max(1.0, std::abs(r.bound));
  r.equality_expected = r.order <= 1;
  r.holds = r.rate <= r.bound + tol;
  if (r.equality_expected) r.holds = r.holds && std::abs(r.rate - r.bound) <= tol;
  return r;
}

double Lemma5Witness::u_min() const { return std::min({u1, u2, u3}); }

RationalTF second_order_allpass(double alpha, double beta) {
  return RationalTF({alpha, beta, 1.0}, {1.0, beta, alpha});
}

Lemma5Witness lemma5_construct(double alpha_c, double beta_c, double omega_p) {
  if (!(alpha_c > 0.0 && alpha_c < 1.0 && beta_c * beta_c < 4.0 * alpha_c)) {
    throw InvalidInput("complex-pole section needs 0 < alpha < 1 and beta^2 < 4 alpha");
  }
  if (!(std::abs(omega_p) > 0.0 && std::abs(omega_p) < kPi)) {
    throw InvalidInput("lemma5_construct needs omega_p outside {0, pi}");
  }
  Lemma5Witness w;
  w.alpha_c = alpha_c;
  w.beta_c = beta_c;
  const double cw = std::cos(omega_p);
  const double s = beta_c + 2.0 * cw;
  w.u1 = 2.0 / (1.0 - alpha_c);
  w.u2 = s > alpha_c - 1.0 ? (2.0 * cw + 2.0) / (s - alpha_c + 1.0) : kInf;
  w.u3 = s < 1.0 - alpha_c ? (2.0 * cw - 2.0) / (s + alpha_c - 1.0) : kInf;
  const double umin = w.u_min();
  if (!(umin > 1.0)) throw NumericalError("lemma5_construct: min{u1,u2,u3} <= 1");

  auto valid = [&](double lam, double& ar, double& br) {
    ar = 1.0 + lam * (alpha_c - 1.0);
    br = -2.0 * cw + lam * s;
    return lam > 1.0 && std::abs(ar) < 1.0 && std::abs(br) < ar + 1.0 &&
           br * br >= 4.0 * ar;
  };
  // Back off from the endpoint toward 1, then creep closer to it.
  std::vector<int> ks;
  for (int k = 10; k >= 1; --k) ks.push_back(k);
  for (int k = 11; k <= 52; ++k) ks.push_back(k);
  bool found = false;
  for (int k : ks) {
    const double lam = 1.0 + (umin - 1.0) * (1.0 - std::ldexp(1.0, -k));
    double ar, br;
    if (valid(lam, ar, br)) {
      w.lambda = lam;
      w.alpha_r = ar;
      w.beta_r = br;
      found = true;
      break;
    }
  }
  if (!found) throw NumericalError("lemma5_construct: no lambda satisfies the discriminant");

  const RationalTF fc = second_order_allpass(alpha_c, beta_c);
  const RationalTF fr = second_order_allpass(w.alpha_r, w.beta_r);
  const cplx u = std::polar(1.0, omega_p);
  w.phase_gap = std::abs(fr(u) - fc(u));
  w.rate_c = logderiv(fc, omega_p).phase_rate;
  w.rate_r = logderiv(fr, omega_p).phase_rate;
  return w;
}

bool is_minimum_phase(const RationalTF& f) {
  if (f.is_zero() || f.num().degree() != f.den().degree()) return false;
  for (const auto& z : f.zeros()) {
    if (std::abs(z) >= 1.0) return false;
  }
  for (const auto& p : f.poles()) {
    if (std::abs(p) >= 1.0) return false;
  }
  return true;
}

double gain_phase_integral(const RationalTF& f, double omega_p) {
  if (!is_minimum_phase(f)) throw InvalidInput("gain-phase integral needs minimum-phase f");
  if (!(omega_p > 0.0 && omega_p < kPi)) {
    throw InvalidInput("gain-phase integral needs omega_p in (0, pi)");
  }
  auto A = [&](double w) { return std::log(std::abs(f(std::polar(1.0, w)))); };
  const double ap = A(omega_p);
  const double cp = std::cos(omega_p);
  auto F = [&](double w) { return (A(w) - ap) / (std::cos(w) - cp); };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto outside = [&](double h) {
    double I = 0.0;
    if (omega_p - h > 0.0) I += GK::integrate(F, 0.0, omega_p - h, 15, 1e-14);
    if (omega_p + h < kPi) I += GK::integrate(F, omega_p + h, kPi, 15, 1e-14);
    return I;
  };
  // The window integral is odd in h: I(h) = I - c1 h - c3 h^3 - ...
  const int K = 5;
  const double h0 = std::min({1e-2, 0.5 * omega_p, 0.5 * (kPi - omega_p)});
  std::vector<std::vector<double>> T(K, std::vector<double>(K, 0.0));
  for (int k = 0; k < K; ++k) {
    T[k][0] = outside(h0 * std::ldexp(1.0, -k));
    for (int j = 1; j <= k; ++j) {
      const double f2 = std::ldexp(1.0, 2 * j - 1);
      T[k][j] = T[k][j - 1] + (T[k][j - 1] - T[k - 1][j - 1]) / (f2 - 1.0);
    }
  }
  return -std::sin(omega_p) / kPi * T[K - 1][K - 1];
}

Lemma6Result lemma6_bound_check(const RationalTF& f) {
  if (!is_minimum_phase(f)) throw InvalidInput("lemma6_bound_check needs minimum-phase f");
  Lemma6Result r;
  r.omega_p = linf_norm(f).omega;
  const DerivativeSample d = logderiv(f, r.omega_p);
  r.theta = wrap_pi(d.phase);
  r.rate = d.phase_rate;
  r.interior = r.omega_p > 0.0 && r.omega_p < kPi;
  const double tol = 1e-10 * std::max(1.0, std::abs(r.rate));
  r.holds_nonpositive = r.rate <= tol;
  if (r.interior) {
    r.interior_bound = -std::abs(r.theta / std::sin(r.omega_p));
    r.holds_interior = r.rate <= r.interior_bound + tol;
  }
  return r;
}

}  // namespace rirkit
