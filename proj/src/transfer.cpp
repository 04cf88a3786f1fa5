#include "rirkit/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "rirkit/error.hpp"

namespace rirkit {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<cplx> roots_or_empty(const Polynomial& p) {
  if (p.is_zero() || p.degree() < 1) return {};
  return root_list(p);
}

std::string format_z(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "j";
  return os.str();
}

bool is_real(const cplx& z) {
  return std::abs(z.imag()) <= 1e-9 * (1.0 + std::abs(z));
}

// Continuous phase contribution of the factor (e^{jw} - r).
double factor_phase(const cplx& r, double omega) {
  const cplx u = std::polar(1.0, omega);
  if (std::abs(r) < 1.0) {
    return omega + std::arg(1.0 - r * std::conj(u));
  }
  return std::arg(-r) + std::arg(1.0 - u / r);
}

double raw_phase(const RationalTF& g, double omega) {
  double th = g.gain() < 0.0 ? kPi : 0.0;
  for (const auto& z : g.zeros()) th += factor_phase(z, omega);
  for (const auto& p : g.poles()) th -= factor_phase(p, omega);
  return th;
}

double log_gain(const RationalTF& g, double omega) {
  const cplx u = std::polar(1.0, omega);
  double a = std::log(std::abs(g.gain()));
  for (const auto& z : g.zeros()) a += std::log(std::abs(u - z));
  for (const auto& p : g.poles()) a -= std::log(std::abs(u - p));
  return a;
}

double gain_rate(const RationalTF& g, double omega) {
  const cplx u = std::polar(1.0, omega);
  cplx s = 0.0;
  for (const auto& z : g.zeros()) s += 1.0 / (u - z);
  for (const auto& p : g.poles()) s -= 1.0 / (u - p);
  return (cplx(0.0, 1.0) * u * s).real();
}

// Bisection on the sign change A'(lo) > 0 > A'(hi).
double bisect_peak(const RationalTF& g, double lo, double hi) {
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (gain_rate(g, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return log_gain(g, lo) >= log_gain(g, hi) ? lo : hi;
}

double golden_peak(const RationalTF& g, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = log_gain(g, c), fd = log_gain(g, d);
  for (int k = 0; k < 200 && (b - a) > 1e-15 * (1.0 + std::abs(a)); ++k) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = log_gain(g, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = log_gain(g, d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

RationalTF::RationalTF(Polynomial num, Polynomial den)
    : num_(std::move(num)), den_(std::move(den)) {
  if (den_.is_zero()) throw InvalidInput("zero denominator");
  zeros_ = roots_or_empty(num_);
  poles_ = roots_or_empty(den_);
  gain_ = num_.is_zero() ? 0.0 : num_.leading() / den_.leading();
  cancel_common_roots();
}

RationalTF::RationalTF(Polynomial num, Polynomial den, std::vector<cplx> zeros,
                       std::vector<cplx> poles)
    : num_(std::move(num)),
      den_(std::move(den)),
      zeros_(std::move(zeros)),
      poles_(std::move(poles)) {
  if (den_.is_zero()) throw InvalidInput("zero denominator");
  gain_ = num_.is_zero() ? 0.0 : num_.leading() / den_.leading();
  cancel_common_roots();
}

void RationalTF::cancel_common_roots() {
  if (num_.is_zero()) {
    zeros_.clear();
    poles_.clear();
    den_ = Polynomial::constant(1.0);
    return;
  }
  bool changed = false;
  for (std::size_t i = 0; i < zeros_.size();) {
    auto it = std::find_if(poles_.begin(), poles_.end(), [&](const cplx& p) {
      return std::abs(p - zeros_[i]) <= kCancelTol;
    });
    if (it != poles_.end()) {
      poles_.erase(it);
      zeros_.erase(zeros_.begin() + static_cast<std::ptrdiff_t>(i));
      changed = true;
    } else {
      ++i;
    }
  }
  if (changed) {
    num_ = Polynomial::from_roots(zeros_, num_.leading());
    den_ = Polynomial::from_roots(poles_, den_.leading());
  }
  if (num_.degree() > den_.degree()) {
    throw InvalidInput("improper transfer function: deg(num) > deg(den)");
  }
}

RationalTF RationalTF::constant(double c) {
  return RationalTF(Polynomial::constant(c), Polynomial::constant(1.0));
}

RationalTF RationalTF::from_zpk(std::vector<cplx> zeros,
                                std::vector<cplx> poles, double gain) {
  Polynomial num = Polynomial::from_roots(zeros, gain);
  Polynomial den = Polynomial::from_roots(poles, 1.0);
  if (gain == 0.0) return RationalTF(Polynomial(), den);
  return RationalTF(std::move(num), std::move(den), std::move(zeros),
                    std::move(poles));
}

cplx RationalTF::operator()(cplx z) const {
  if (num_.is_zero()) return 0.0;
  cplx v = gain_;
  for (const auto& p : poles_) {
    const cplx d = z - p;
    if (std::abs(d) <= 1e-14 * (1.0 + std::abs(z))) {
      throw InvalidInput("pole hit at z=" + format_z(z));
    }
    v /= d;
  }
  for (const auto& q : zeros_) v *= (z - q);
  return v;
}

RationalTF operator*(const RationalTF& a, const RationalTF& b) {
  if (a.is_zero() || b.is_zero()) {
    return RationalTF(Polynomial(), a.den_ * b.den_);
  }
  std::vector<cplx> z(a.zeros_);
  z.insert(z.end(), b.zeros_.begin(), b.zeros_.end());
  std::vector<cplx> p(a.poles_);
  p.insert(p.end(), b.poles_.begin(), b.poles_.end());
  return RationalTF(a.num_ * b.num_, a.den_ * b.den_, std::move(z),
                    std::move(p));
}

RationalTF operator*(double s, const RationalTF& g) {
  if (s == 0.0 || g.is_zero()) return RationalTF(Polynomial(), g.den_);
  return RationalTF(s * g.num_, g.den_, g.zeros_, g.poles_);
}

cplx evaluate(const RationalTF& g, cplx z) { return g(z); }

double pole_distance_to_circle(const RationalTF& g) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& p : g.poles()) d = std::min(d, std::abs(std::abs(p) - 1.0));
  return d;
}

double root_distance_to_circle(const RationalTF& g) {
  double d = pole_distance_to_circle(g);
  for (const auto& z : g.zeros()) d = std::min(d, std::abs(std::abs(z) - 1.0));
  return d;
}

int unstable_pole_count(const RationalTF& g, double circle_tol) {
  int n = 0;
  for (const auto& p : g.poles()) {
    const double r = std::abs(p);
    if (std::abs(r - 1.0) <= circle_tol) {
      throw InvalidInput("not in RL-infinity: pole on the unit circle at " +
                         format_z(p));
    }
    if (r > 1.0) ++n;
  }
  return n;
}

bool pip_check(const RationalTF& g) {
  // Position along the unstable real axis, z in (1, inf] U [-inf, -1).
  auto position = [](double z) { return (z - 1.0) / (z + 1.0); };
  std::vector<double> zs;
  for (const auto& z : g.zeros()) {
    if (is_real(z) && std::abs(z.real()) > 1.0) zs.push_back(position(z.real()));
  }
  if (g.strictly_proper()) zs.push_back(1.0);  // z = infinity
  std::vector<double> ps;
  for (const auto& p : g.poles()) {
    if (is_real(p) && std::abs(p.real()) > 1.0) ps.push_back(position(p.real()));
  }
  std::sort(zs.begin(), zs.end());
  for (std::size_t k = 1; k < zs.size(); ++k) {
    const auto between = std::count_if(ps.begin(), ps.end(), [&](double s) {
      return s > zs[k - 1] && s < zs[k];
    });
    if (between % 2 != 0) return false;
  }
  return true;
}

double unwrapped_phase(const RationalTF& g, double omega) {
  if (g.is_zero()) throw InvalidInput("phase of the zero function");
  const double th0 = raw_phase(g, 0.0);
  // Shift so that theta(0) lands in (-pi, pi].
  double shift = 2.0 * kPi * std::ceil((th0 - kPi) / (2.0 * kPi));
  if (std::abs(th0 - shift + kPi) < 1e-9) shift -= 2.0 * kPi;
  return raw_phase(g, omega) - shift;
}

DerivativeSample logderiv(const RationalTF& g, double omega) {
  if (g.is_zero()) throw InvalidInput("logderiv of the zero function");
  const cplx u = std::polar(1.0, omega);
  cplx s = 0.0;
  for (const auto& z : g.zeros()) {
    if (std::abs(u - z) <= 1e-14) {
      throw InvalidInput("zero on the unit circle at w=" +
                         std::to_string(omega));
    }
    s += 1.0 / (u - z);
  }
  for (const auto& p : g.poles()) {
    if (std::abs(u - p) <= 1e-14) {
      throw InvalidInput("pole on the unit circle at w=" +
                         std::to_string(omega));
    }
    s -= 1.0 / (u - p);
  }
  const cplx q = cplx(0.0, 1.0) * u * s;
  DerivativeSample out;
  out.omega = omega;
  out.value = g(u);
  out.gain_log = log_gain(g, omega);
  out.phase = unwrapped_phase(g, omega);
  out.gain_rate = q.real();
  out.phase_rate = q.imag();
  return out;
}

PeakInfo linf_norm(const RationalTF& g, const NormOptions& opts) {
  if (g.is_zero()) return {0.0, 0.0, false, 0.0};
  for (const auto& p : g.poles()) {
    if (std::abs(std::abs(p) - 1.0) <= 1e-9) {
      throw InvalidInput("not in RL-infinity: pole on the unit circle at " +
                         format_z(p));
    }
  }
  const int n = pole_distance_to_circle(g) < opts.densify_distance
                    ? std::max(opts.grid, opts.dense_grid)
                    : opts.grid;
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) w[static_cast<std::size_t>(k)] = kPi * k / (n - 1);
  for (const auto& p : g.poles()) {
    const double a = std::abs(std::arg(p));
    if (a > 0.0 && a < kPi) w.push_back(a);
  }
  std::sort(w.begin(), w.end());
  w.erase(std::unique(w.begin(), w.end()), w.end());

  const std::size_t m = w.size();
  std::vector<double> a(m);
  for (std::size_t k = 0; k < m; ++k) a[k] = log_gain(g, w[k]);

  std::vector<std::size_t> cand;
  for (std::size_t k = 0; k < m; ++k) {
    const bool left = k == 0 || a[k] >= a[k - 1];
    const bool right = k + 1 == m || a[k] >= a[k + 1];
    if (left && right) cand.push_back(k);
  }
  std::sort(cand.begin(), cand.end(),
            [&](std::size_t i, std::size_t j) { return a[i] > a[j]; });

  std::vector<std::size_t> picked;
  for (std::size_t c : cand) {
    if (picked.size() == 3) break;
    const bool near = std::any_of(picked.begin(), picked.end(), [&](auto p) {
      return (c > p ? c - p : p - c) <= 2;
    });
    if (!near) picked.push_back(c);
  }

  auto refine = [&](std::size_t k) -> double {
    if (k == 0 || k + 1 == m) {
      const double edge = w[k];
      const double inner = k == 0 ? w[1] : w[m - 2];
      const double h = std::min(1e-7, 0.5 * std::abs(inner - edge));
      const double probe = k == 0 ? edge + h : edge - h;
      const double rate = gain_rate(g, probe);
      const bool rising_inward = k == 0 ? rate > 0.0 : rate < 0.0;
      if (!rising_inward) return edge;
      const double lo = std::min(probe, inner), hi = std::max(probe, inner);
      if (gain_rate(g, lo) > 0.0 && gain_rate(g, hi) < 0.0) {
        return bisect_peak(g, lo, hi);
      }
      return golden_peak(g, lo, hi);
    }
    const double lo = w[k - 1], hi = w[k + 1];
    if (gain_rate(g, lo) > 0.0 && gain_rate(g, hi) < 0.0) {
      return bisect_peak(g, lo, hi);
    }
    return golden_peak(g, lo, hi);
  };

  struct Peak {
    double omega;
    double value;
  };
  std::vector<Peak> peaks;
  for (std::size_t k : picked) {
    const double om = refine(k);
    const double v = std::max(log_gain(g, om), a[k]);
    peaks.push_back({v == a[k] && log_gain(g, om) < a[k] ? w[k] : om, v});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& x, const Peak& y) { return x.value > y.value; });
  // Drop duplicates converging to the same frequency.
  std::vector<Peak> distinct;
  for (const auto& p : peaks) {
    const bool dup = std::any_of(distinct.begin(), distinct.end(), [&](auto& q) {
      return std::abs(q.omega - p.omega) <= 1e-9;
    });
    if (!dup) distinct.push_back(p);
  }

  PeakInfo out;
  out.norm = std::exp(distinct.front().value);
  out.omega = distinct.front().omega;
  out.second_peak = distinct.size() > 1 ? std::exp(distinct[1].value) : 0.0;
  out.unique = out.second_peak < (1.0 - opts.uniqueness_margin) * out.norm;
  return out;
}

std::string to_string(GClass c) {
  switch (c) {
    case GClass::G1_boundary: return "G1_boundary";
    case GClass::G2_interior: return "G2_interior";
    case GClass::G1_interior: return "G1_interior";
    case GClass::Gn_other: return "Gn_other";
  }
  return "Gn_other";
}

bool ClassTag::boundary_peak() const {
  return peak_omega == 0.0 || peak_omega == kPi;
}

ClassTag classify(const RationalTF& g, const NormOptions& opts) {
  ClassTag t;
  t.n_unstable = unstable_pole_count(g);
  if (t.n_unstable == 0) {
    throw PreconditionError("not in G: no unstable poles");
  }
  t.pip = pip_check(g);
  const PeakInfo pk = linf_norm(g, opts);
  t.peak_omega = pk.omega;
  t.peak_gain = pk.norm;
  t.peak_unique = pk.unique;
  if (!t.pip || !t.peak_unique) {
    t.class_name = GClass::Gn_other;
  } else if (t.n_unstable == 1 && t.boundary_peak()) {
    t.class_name = GClass::G1_boundary;
  } else if (t.n_unstable == 2 && !t.boundary_peak()) {
    t.class_name = GClass::G2_interior;
  } else if (t.n_unstable == 1) {
    t.class_name = GClass::G1_interior;
  } else {
    t.class_name = GClass::Gn_other;
  }
  return t;
}

}  // namespace rirkit
