#include "rirkit/nyquist.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rirkit/error.hpp"

namespace rirkit {

namespace {

constexpr double kPi = std::numbers::pi;

struct Sample {
  double omega;
  cplx value;
};

double contour_radius(const ContourSpec& spec) {
  return spec.map == ContourMap::inverse ? 1.0 / (1.0 - spec.epsilon)
                                         : 1.0 + spec.epsilon;
}

bool excluded(const ContourSpec& spec, double omega) {
  for (double c : spec.exclude_centers) {
    for (double s : {c, -c}) {
      double d = std::remainder(omega - s, 2.0 * kPi);
      if (std::abs(d) <= spec.exclude_halfwidth) return true;
    }
  }
  return false;
}

// Subdivide [a, b] until the argument of P - 1 turns slowly enough.
void refine(const RationalTF& L, const ContourSpec& spec, const Sample& a,
            const Sample& b, int depth, std::vector<Sample>& out) {
  const cplx da = a.value - 1.0, db = b.value - 1.0;
  const double turn = std::abs(std::arg(db / da));
  const bool wide = turn > kPi / 8.0 ||
                    std::abs(b.value - a.value) > 0.5 * (std::abs(da) + std::abs(db));
  if (!wide || depth >= 48 || b.omega - a.omega < 1e-13) {
    out.push_back(b);
    return;
  }
  const double m = 0.5 * (a.omega + b.omega);
  const Sample mid{m, contour_point(L, spec, m)};
  refine(L, spec, a, mid, depth + 1, out);
  refine(L, spec, mid, b, depth + 1, out);
}

int sign_of(double v) { return v < 0.0 ? -1 : 1; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

cplx contour_point(const RationalTF& L, const ContourSpec& spec, double omega) {
  const double r = contour_radius(spec);
  const double w = spec.map == ContourMap::inverse ? -omega : omega;
  return L(std::polar(r, w));
}

CrossingReport crossing_counts(const RationalTF& L, const ContourSpec& input) {
  if (input.epsilon < 0.0 || input.epsilon >= 1.0) {
    throw InvalidInput("contour epsilon must lie in [0, 1)");
  }
  if (input.samples < 1024) throw InvalidInput("contour needs >= 1024 samples");
  ContourSpec spec = input;
  CrossingReport rep;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const double r = contour_radius(spec);
    const bool hit = std::any_of(L.poles().begin(), L.poles().end(),
                                 [&](const cplx& p) {
                                   return std::abs(std::abs(p) - r) <= 1e-9;
                                 });
    if (!hit) break;
    spec.epsilon += 1e-6;
    rep.warning = "pole on contour; epsilon shifted to " + fmt(spec.epsilon);
  }
  rep.epsilon_used = spec.epsilon;

  const int n = spec.samples;
  const double h = 2.0 * kPi / n;
  std::vector<Sample> base;
  base.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k < n; ++k) {
    const double w = -kPi + (k + 0.5) * h;
    base.push_back({w, contour_point(L, spec, w)});
  }
  base.push_back({base.front().omega + 2.0 * kPi, base.front().value});

  std::vector<Sample> pts{base.front()};
  for (std::size_t k = 0; k + 1 < base.size(); ++k) {
    refine(L, spec, base[k], base[k + 1], 0, pts);
  }

  double turn = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const Sample& a = pts[k];
    const Sample& b = pts[k + 1];
    turn += std::arg((b.value - 1.0) / (a.value - 1.0));
    const int sa = sign_of(a.value.imag()), sb = sign_of(b.value.imag());
    if (sa == sb) continue;
    double lo = a.omega, hi = b.omega;
    while (hi - lo > 1e-10) {
      const double m = 0.5 * (lo + hi);
      if (sign_of(contour_point(L, spec, m).imag()) == sa) {
        lo = m;
      } else {
        hi = m;
      }
    }
    const double wc = 0.5 * (lo + hi);
    const double wrapped = std::remainder(wc, 2.0 * kPi);
    if (excluded(spec, wrapped)) continue;
    const double re = contour_point(L, spec, wc).real();
    if (std::abs(re - 1.0) <= 1e-9) {
      throw NumericalError("degenerate crossing: plot passes through 1+j0 at w=" +
                           fmt(wrapped));
    }
    if (re <= 1.0) continue;
    const int dir = sa < 0 ? +1 : -1;
    rep.crossings.push_back({wrapped, re, dir});
    (dir > 0 ? rep.nu_plus : rep.nu_minus) += 1;
  }
  rep.nu_o = rep.nu_plus - rep.nu_minus;
  rep.encirclements_cw = -rep.nu_o;
  rep.winding_cw = -static_cast<int>(std::lround(turn / (2.0 * kPi)));
  return rep;
}

RootSet closed_loop_poles(const RationalTF& L) {
  const Polynomial ch = L.den() - L.num();
  if (ch.is_zero()) {
    throw InvalidInput("identically zero characteristic polynomial");
  }
  if (ch.degree() == 0) return RootSet{};
  return roots(ch);
}

Lemma1Result lemma1_check(const RationalTF& L, int n) {
  Lemma1Result res;
  res.n = n;
  for (double e = 1e-2; e >= 1e-8 * 0.999; e /= 10.0) {
    ContourSpec spec;
    spec.epsilon = e;
    res.epsilons.push_back(e);
    res.nu_o.push_back(crossing_counts(L, spec).nu_o);
  }
  const std::size_t m = res.nu_o.size();
  const int fine = res.nu_o[m - 1];
  if (res.nu_o[m - 2] != fine || res.nu_o[m - 3] != fine) {
    throw NumericalError("eps_+ not found: crossing counts disagree across epsilon");
  }
  res.coarse_disagree =
      std::any_of(res.nu_o.begin(), res.nu_o.end(), [&](int v) { return v != fine; });
  res.nyquist_holds = fine == -n;

  const RootSet cl = closed_loop_poles(L);
  for (const auto& r : cl.roots) {
    res.max_root_modulus = std::max(res.max_root_modulus, std::abs(r.value));
  }
  const bool improper = L.den().degree() > (L.den() - L.num()).degree();
  res.holds = !improper && res.max_root_modulus <= 1.0 + 1e-9;
  if (improper) res.diagnostic = "closed loop improper (L(inf) = 1)";
  if (res.holds != res.nyquist_holds) {
    res.diagnostic = "Nyquist count disagrees with closed-loop roots (max |root| = " +
                     fmt(res.max_root_modulus) + "); roots decide";
  }
  return res;
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::conjugate_pair: return "conjugate_pair";
    case Mode::pole_at_plus_one: return "pole_at_+1";
    case Mode::pole_at_minus_one: return "pole_at_-1";
    case Mode::none: return "none";
  }
  return "none";
}

StabilityVerdict marginal_verdict(const RationalTF& L, double omega_c,
                                  const VerdictOptions& opts) {
  if (omega_c < 0.0 || omega_c > kPi) {
    throw InvalidInput("critical frequency must lie in [0, pi]");
  }
  const DerivativeSample dc = logderiv(L, omega_c);
  if (std::abs(dc.gain_rate) > opts.rate_tol) {
    throw PreconditionError("A'_L(w_c) = " + fmt(dc.gain_rate) + " is not zero");
  }
  StabilityVerdict v;
  v.n = unstable_pole_count(L);
  v.theta_rate = dc.phase_rate;

  // Condition (i).
  const cplx zc = std::polar(1.0, omega_c);
  const cplx slope = dc.value * cplx(0.0, -1.0) / zc *
                     cplx(dc.gain_rate, dc.phase_rate);  // dL/dz = L q / (j z)
  bool unity = std::abs(dc.value - 1.0) <= opts.unity_tol &&
               std::abs(slope) > 1e-12;
  if (unity) {
    const int grid = pole_distance_to_circle(L) < 1e-2 ? (1 << 14) : 4096;
    auto dist = [&](double w) { return std::abs(L(std::polar(1.0, w)) - 1.0); };
    std::vector<double> ws, ds;
    for (int k = 0; k < grid; ++k) {
      const double w = kPi * k / (grid - 1);
      if (std::abs(w - omega_c) <= opts.exclusion) continue;
      ws.push_back(w);
      ds.push_back(dist(w));
    }
    for (std::size_t k = 0; k < ws.size() && unity; ++k) {
      const bool local_min = (k == 0 || ds[k] <= ds[k - 1]) &&
                             (k + 1 == ws.size() || ds[k] <= ds[k + 1]);
      if (!local_min) continue;
      double a = k == 0 ? ws[k] : ws[k - 1];
      double b = k + 1 == ws.size() ? ws[k] : ws[k + 1];
      const double g = (std::sqrt(5.0) - 1.0) / 2.0;
      for (int it = 0; it < 100 && b - a > 1e-14; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (dist(c) < dist(d)) b = d; else a = c;
      }
      const double wm = 0.5 * (a + b);
      if (std::abs(wm - omega_c) > opts.exclusion && dist(wm) <= 1e-9) {
        unity = false;
        v.diagnostic = "L = 1 also at w = " + fmt(wm);
      }
    }
  }
  v.cond_i = unity;

  ContourSpec spec;
  spec.epsilon = 0.0;
  spec.map = ContourMap::direct;
  spec.exclude_centers = {omega_c};
  spec.exclude_halfwidth = opts.exclusion;
  if (pole_distance_to_circle(L) < 1e-2) spec.samples = 1 << 14;
  v.nu_o0 = crossing_counts(L, spec).nu_o;
  const bool edge = omega_c == 0.0 || omega_c == kPi;
  v.cond_iia = v.nu_o0 == (edge ? v.n - 1 : v.n - 2) && v.theta_rate > 0.0;
  v.cond_iib = v.nu_o0 == v.n && v.theta_rate < 0.0;
  v.certificate = v.cond_i && (v.cond_iia || v.cond_iib);

  // Ground truth from closed-loop roots.
  const RootSet cl = closed_loop_poles(L);
  const bool improper = L.den().degree() > (L.den() - L.num()).degree();
  v.all_in_closed_disk = !improper;
  for (const auto& r : cl.roots) {
    const double m = std::abs(r.value);
    v.max_root_modulus = std::max(v.max_root_modulus, m);
    if (m > 1.0 + opts.boundary_tol) v.all_in_closed_disk = false;
    if (std::abs(m - 1.0) <= opts.boundary_tol) {
      v.boundary_roots.push_back({r.value, r.multiplicity});
    }
  }
  const bool simple = std::all_of(v.boundary_roots.begin(), v.boundary_roots.end(),
                                  [](const BoundaryRoot& b) { return b.multiplicity == 1; });
  v.marginal = v.all_in_closed_disk && !v.boundary_roots.empty() && simple;
  if (v.marginal) {
    const auto& br = v.boundary_roots;
    const double tol = std::sqrt(opts.boundary_tol);
    if (br.size() == 1 && std::abs(br[0].location - 1.0) <= tol) {
      v.mode = Mode::pole_at_plus_one;
    } else if (br.size() == 1 && std::abs(br[0].location + 1.0) <= tol) {
      v.mode = Mode::pole_at_minus_one;
    } else if (br.size() == 2 && br[0].location.imag() != 0.0 &&
               std::abs(br[0].location - std::conj(br[1].location)) <= tol) {
      v.mode = Mode::conjugate_pair;
    }
  }
  v.single_mode = v.mode != Mode::none;
  v.roots_agree = v.single_mode == v.certificate;
  if (improper) v.diagnostic = "closed loop improper (L(inf) = 1)";
  if (!v.roots_agree) {
    std::string d = "certificate disagrees with closed-loop roots; roots decide";
    v.diagnostic = v.diagnostic.empty() ? d : v.diagnostic + "; " + d;
  }
  return v;
}

}  // namespace rirkit
