#include "rirkit/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rirkit/error.hpp"

namespace rirkit {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Value, derivative and the running-error bound sum |a_k| |z|^(n-k).
struct HornerResult {
  cplx value;
  cplx slope;
  double bound;
};

HornerResult horner(std::span<const double> c, cplx z) {
  cplx v = c[0];
  cplx d = 0.0;
  double b = std::abs(c[0]);
  const double az = std::abs(z);
  for (std::size_t k = 1; k < c.size(); ++k) {
    d = d * z + v;
    v = v * z + c[k];
    b = b * az + std::abs(c[k]);
  }
  return {v, d, b};
}

// Laguerre iteration on a complex polynomial, used only when Aberth stalls.
cplx laguerre(const std::vector<cplx>& a, cplx x) {
  const int n = static_cast<int>(a.size()) - 1;
  for (int iter = 0; iter < 200; ++iter) {
    cplx p = a[0], dp = 0.0, ddp = 0.0;
    for (int k = 1; k <= n; ++k) {
      ddp = ddp * x + dp;
      dp = dp * x + p;
      p = p * x + a[k];
    }
    ddp *= 2.0;
    if (std::abs(p) == 0.0) return x;
    const cplx g = dp / p;
    const cplx h = g * g - ddp / p;
    const cplx sq = std::sqrt(static_cast<double>(n - 1) *
                              (static_cast<double>(n) * h - g * g));
    cplx den = std::abs(g + sq) > std::abs(g - sq) ? g + sq : g - sq;
    const cplx step = std::abs(den) > 0.0
                          ? static_cast<double>(n) / den
                          : std::polar(1.0 + std::abs(x), double(iter));
    x -= step;
    if (std::abs(step) <= 4.0 * kEps * std::abs(x)) return x;
  }
  return x;
}

std::vector<cplx> deflation_roots(std::span<const double> monic) {
  std::vector<cplx> a(monic.begin(), monic.end());
  std::vector<cplx> out;
  while (a.size() > 1) {
    cplx r = laguerre(a, cplx(0.0, 0.0));
    out.push_back(r);
    // synthetic division by (z - r)
    std::vector<cplx> q(a.size() - 1);
    cplx carry = a[0];
    q[0] = carry;
    for (std::size_t k = 1; k + 1 < a.size(); ++k) {
      carry = carry * r + a[k];
      q[k] = carry;
    }
    a = std::move(q);
  }
  return out;
}

// Simultaneous Aberth-Ehrlich iteration. Returns false on stagnation.
bool aberth(std::span<const double> monic, int max_iter, std::vector<cplx>& z) {
  const int n = static_cast<int>(monic.size()) - 1;
  // Geometric-mean radius of the roots.
  const double r =
      std::pow(std::abs(monic[static_cast<std::size_t>(n)]), 1.0 / n);
  const double radius = r > 0.0 ? r : 1.0;
  z.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n + 0.4;
    z[static_cast<std::size_t>(k)] = std::polar(radius, angle);
  }
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  for (int iter = 0; iter < max_iter; ++iter) {
    bool all = true;
    for (int i = 0; i < n; ++i) {
      auto ui = static_cast<std::size_t>(i);
      if (done[ui]) continue;
      const auto h = horner(monic, z[ui]);
      if (std::abs(h.value) <= 8.0 * kEps * h.bound) {
        done[ui] = true;
        continue;
      }
      all = false;
      const cplx ratio = h.value / h.slope;
      cplx s = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j != i) s += 1.0 / (z[ui] - z[static_cast<std::size_t>(j)]);
      }
      const cplx corr = ratio / (1.0 - ratio * s);
      if (!std::isfinite(corr.real()) || !std::isfinite(corr.imag())) {
        return false;
      }
      z[ui] -= corr;
      if (std::abs(corr) <= kEps * std::abs(z[ui])) done[ui] = true;
    }
    if (all) return true;
  }
  return std::all_of(done.begin(), done.end(), [](bool b) { return b; });
}

void enforce_conjugate_symmetry(std::vector<cplx>& z, double tol) {
  std::vector<cplx> real, pos, neg;
  for (const auto& r : z) {
    if (std::abs(r.imag()) <= tol * (1.0 + std::abs(r))) {
      real.emplace_back(r.real(), 0.0);
    } else if (r.imag() > 0.0) {
      pos.push_back(r);
    } else {
      neg.push_back(r);
    }
  }
  std::vector<cplx> out = real;
  std::vector<bool> used(neg.size(), false);
  for (const auto& p : pos) {
    std::size_t best = neg.size();
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < neg.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(p - std::conj(neg[k]));
      if (d < dist) {
        dist = d;
        best = k;
      }
    }
    if (best == neg.size()) {
      out.emplace_back(p.real(), 0.0);
      continue;
    }
    used[best] = true;
    const cplx avg = 0.5 * (p + std::conj(neg[best]));
    out.push_back(avg);
    out.push_back(std::conj(avg));
  }
  for (std::size_t k = 0; k < neg.size(); ++k) {
    if (!used[k]) out.emplace_back(neg[k].real(), 0.0);
  }
  std::sort(out.begin(), out.end(), [](const cplx& a, const cplx& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  z = std::move(out);
}

}  // namespace

Polynomial::Polynomial(std::vector<double> coeffs, double trim_tol) {
  if (coeffs.empty()) coeffs.push_back(0.0);
  double mx = 0.0;
  for (double c : coeffs) mx = std::max(mx, std::abs(c));
  if (mx == 0.0) {
    coeffs_ = {0.0};
    zero_ = true;
    return;
  }
  std::size_t first = 0;
  while (first + 1 < coeffs.size() &&
         std::abs(coeffs[first]) <= trim_tol * mx) {
    ++first;
  }
  coeffs_.assign(coeffs.begin() + static_cast<std::ptrdiff_t>(first),
                 coeffs.end());
  zero_ = false;
}

Polynomial Polynomial::from_roots(std::span<const cplx> roots,
                                  double leading) {
  std::vector<cplx> c{cplx(leading)};
  for (const auto& r : roots) {
    c.push_back(0.0);
    for (std::size_t k = c.size() - 1; k > 0; --k) c[k] -= r * c[k - 1];
  }
  std::vector<double> re(c.size());
  std::transform(c.begin(), c.end(), re.begin(),
                 [](const cplx& v) { return v.real(); });
  // Exact cancellation in the product must not be trimmed away.
  return Polynomial(std::move(re), 0.0);
}

double Polynomial::max_abs_coeff() const {
  double mx = 0.0;
  for (double c : coeffs_) mx = std::max(mx, std::abs(c));
  return mx;
}

cplx Polynomial::operator()(cplx z) const {
  cplx v = coeffs_[0];
  for (std::size_t k = 1; k < coeffs_.size(); ++k) v = v * z + coeffs_[k];
  return v;
}

double Polynomial::operator()(double x) const {
  double v = coeffs_[0];
  for (std::size_t k = 1; k < coeffs_.size(); ++k) v = v * x + coeffs_[k];
  return v;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  const auto& x = a.coeffs_;
  const auto& y = b.coeffs_;
  std::vector<double> c(std::max(x.size(), y.size()), 0.0);
  std::copy(x.begin(), x.end(), c.end() - static_cast<std::ptrdiff_t>(x.size()));
  for (std::size_t k = 0; k < y.size(); ++k) {
    c[c.size() - y.size() + k] += y[k];
  }
  return Polynomial(std::move(c), 0.0);
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
  return a + (-1.0) * b;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return Polynomial();
  std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) {
      c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    }
  }
  return Polynomial(std::move(c), 0.0);
}

Polynomial operator*(double s, const Polynomial& p) {
  std::vector<double> c = p.coeffs_;
  for (double& v : c) v *= s;
  return Polynomial(std::move(c), 0.0);
}

cplx eval(const Polynomial& p, cplx z) { return p(z); }

Polynomial derivative(const Polynomial& p) {
  const int n = p.degree();
  if (n == 0) return Polynomial();
  std::vector<double> d(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    d[static_cast<std::size_t>(k)] =
        p.coeffs()[static_cast<std::size_t>(k)] * (n - k);
  }
  return Polynomial(std::move(d), 0.0);
}

int RootSet::count() const {
  int n = 0;
  for (const auto& r : roots) n += r.multiplicity;
  return n;
}

std::vector<cplx> RootSet::expanded() const {
  std::vector<cplx> out;
  for (const auto& r : roots) {
    for (int k = 0; k < r.multiplicity; ++k) out.push_back(r.value);
  }
  return out;
}

std::vector<cplx> root_list(const Polynomial& p, const RootOptions& opts) {
  if (p.is_zero()) throw InvalidInput("undefined roots: zero polynomial");
  if (p.degree() < 1) throw InvalidInput("undefined roots: degree 0");

  std::vector<double> c = p.coeffs();
  std::vector<cplx> out;
  // Exact roots at the origin.
  while (c.size() > 1 && c.back() == 0.0) {
    c.pop_back();
    out.emplace_back(0.0, 0.0);
  }
  if (c.size() > 1) {
    const double lead = c.front();
    for (double& v : c) v /= lead;
    std::vector<cplx> z;
    if (c.size() == 2) {
      z = {cplx(-c[1], 0.0)};
    } else if (!aberth(c, opts.max_iterations, z)) {
      z = deflation_roots(c);
      // Polish against the undeflated polynomial.
      for (auto& r : z) {
        for (int k = 0; k < 3; ++k) {
          const auto h = horner(c, r);
          if (std::abs(h.slope) == 0.0) break;
          const cplx step = h.value / h.slope;
          if (!std::isfinite(step.real())) break;
          r -= step;
        }
      }
    }
    out.insert(out.end(), z.begin(), z.end());
  }
  enforce_conjugate_symmetry(out, opts.pairing_tol);
  return out;
}

RootSet roots(const Polynomial& p, const RootOptions& opts) {
  std::vector<cplx> z = root_list(p, opts);
  RootSet rs;
  std::vector<bool> taken(z.size(), false);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (taken[i]) continue;
    cplx sum = z[i];
    int m = 1;
    taken[i] = true;
    for (std::size_t j = i + 1; j < z.size(); ++j) {
      const double tol = opts.cluster_tol * (1.0 + std::abs(z[i]));
      if (!taken[j] && std::abs(z[j] - z[i]) <= tol) {
        taken[j] = true;
        sum += z[j];
        ++m;
      }
    }
    rs.roots.push_back({sum / static_cast<double>(m), m});
  }
  for (const auto& r : rs.roots) {
    rs.residual = std::max(rs.residual, std::abs(p(r.value)));
  }
  return rs;
}

}  // namespace rirkit
