// Acceptance criteria: one PASS/FAIL line each. Exit status is nonzero when
// any criterion fails.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rirkit/casestudies.hpp"
#include "rirkit/error.hpp"
#include "rirkit/nyquist.hpp"
#include "rirkit/rir.hpp"

using namespace rirkit;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

int failures = 0;

void criterion(int id, const char* name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.check(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %d %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", id, name, secs,
              o.detail.str().empty() ? "" : ": ", o.detail.str().c_str());
  std::fflush(stdout);
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool rel_close(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::abs(want);
}

// Matrix-exponential ZOH of a controllable canonical realization of
// -k / ((s^2 - p^2)(tau s + 1)).
cplx zoh_oracle(const MaglevParams& m, cplx z) {
  const double a1 = 1.0 / m.tau, a2 = -m.p * m.p, a3 = -m.p * m.p / m.tau;
  Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
  M(0, 1) = m.T;
  M(1, 2) = m.T;
  M(2, 0) = -a3 * m.T;
  M(2, 1) = -a2 * m.T;
  M(2, 2) = -a1 * m.T;
  M(2, 3) = m.T;
  const Eigen::Matrix4d E = M.exp();
  const Eigen::Matrix3cd R = z * Eigen::Matrix3cd::Identity() - E.topLeftCorner<3, 3>().cast<cplx>();
  const Eigen::Vector3cd x = R.partialPivLu().solve(E.topRightCorner<3, 1>().cast<cplx>());
  return -m.k / m.tau * x(0);
}

// Greedy nearest matching of two root lists of equal size.
double match_error(std::vector<cplx> want, std::vector<cplx> got) {
  if (want.size() != got.size()) return INFINITY;
  double worst = 0.0;
  for (cplx w : want) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < got.size(); ++i) {
      if (std::abs(got[i] - w) < std::abs(got[best] - w)) best = i;
    }
    worst = std::max(worst, std::abs(got[best] - w));
    got.erase(got.begin() + static_cast<long>(best));
  }
  return worst;
}

RationalTF random_tf(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), rad(0.2, 1.8);
  std::vector<cplx> zs, ps;
  auto add = [&](std::vector<cplx>& v, int count) {
    for (int k = 0; k < count; ++k) {
      const double r = rad(rng);
      if (std::abs(r - 1.0) < 0.05) continue;
      if (u(rng) > 0.0) {
        const cplx c = std::polar(r, std::abs(u(rng)) * kPi);
        v.push_back(c);
        v.push_back(std::conj(c));
      } else {
        v.emplace_back(u(rng) > 0 ? r : -r, 0.0);
      }
    }
  };
  add(ps, 3);
  if (ps.empty()) ps.emplace_back(1.5, 0.0);
  add(zs, 2);
  while (zs.size() > ps.size()) {
    const bool pair = zs.back().imag() != 0.0;
    zs.pop_back();
    if (pair) zs.pop_back();
  }
  return RationalTF::from_zpk(zs, ps, 0.5 + std::abs(u(rng)));
}

RationalTF random_min_phase(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> zs, ps;
  auto add = [&](std::vector<cplx>& v) {
    if (u(rng) < 0.5) {
      const cplx c = std::polar(0.1 + 0.8 * u(rng), 0.2 + 2.7 * u(rng));
      v.push_back(c);
      v.push_back(std::conj(c));
    } else {
      v.emplace_back(1.8 * u(rng) - 0.9, 0.0);
      v.emplace_back(1.8 * u(rng) - 0.9, 0.0);
    }
  };
  add(zs);
  add(ps);
  return RationalTF::from_zpk(zs, ps, 0.5 + u(rng));
}

void fhn_criteria() {
  const FHNModel model;
  FHNSearch search;
  bool have_search = false;

  criterion(1, "FHN lower bound of reference g", [](Outcome& o) {
    const RationalTF g({1.5679e-5, -2.5685e-5}, {1.0, -2.000985, 1.000994});
    const PeakInfo pk = linf_norm(g);
    const double inv = 1.0 / pk.norm;
    o.check(rel_close(inv, 0.2868, 0.05), "1/||g|| = " + num(inv));
    o.check(pk.omega >= 0.002 && pk.omega <= 0.004, "w_p = " + num(pk.omega));
    o.detail << (o.pass ? "1/||g|| = " + num(inv) + ", w_p = " + num(pk.omega) : "");
  });

  criterion(2, "FHN e_o search, fixed point, g_eo", [&](Outcome& o) {
    search = fhn_search_eo(model);
    have_search = true;
    const FixedPoint& fp = search.fixed_point;
    o.check(std::abs(search.e_o + 0.1192) <= 3e-3, "e_o = " + num(search.e_o));
    o.check(std::abs(fp.xbar + 0.9389) <= 5e-4 && std::abs(fp.ybar + 0.2986) <= 5e-4,
            "fixed point (" + num(fp.xbar) + ", " + num(fp.ybar) + ")");
    const auto& n = search.g_eo.num().coeffs();
    const auto& d = search.g_eo.den().coeffs();
    const double s = 1.0 / d[0];
    o.check(rel_close(n[0] * s, 1.8767e-5, 1e-3), "num[0] = " + num(n[0] * s));
    o.check(rel_close(n[1] * s, -2.8769e-5, 1e-3), "num[1] = " + num(n[1] * s));
    o.check(rel_close(d[1] * s, -2.00039, 1e-3), "den[1] = " + num(d[1] * s));
    o.check(rel_close(d[2] * s, 1.000399, 1e-3), "den[2] = " + num(d[2] * s));
    if (o.pass) o.detail << "e_o = " << num(search.e_o);
  });

  criterion(3, "FHN perturbation synthesis", [&](Outcome& o) {
    if (!have_search) throw VerificationError("no e_o");
    const FHNPerturbation p = fhn_perturbation(search.e_o, search.g_eo, 0.0);
    const AllPassSpec& sp = p.synth.spec;
    o.check(std::abs(sp.a + 0.9969) <= 1e-3, "a = " + num(sp.a));
    o.check(std::abs(sp.scale - std::abs(search.e_o)) <= 3e-3, "scale = " + num(sp.scale));
    int near = 0;
    cplx pair_sum = 0.0;
    for (cplx r : closed_loop_poles(p.delta_f * search.g_eo).expanded()) {
      if (std::abs(std::abs(r) - 1.0) <= 1e-3) {
        ++near;
        pair_sum += r;
      } else if (std::abs(r) >= 1.0) {
        o.check(false, "root outside D: |r| = " + num(std::abs(r)));
      }
    }
    o.check(near == 2 && std::abs(pair_sum.imag()) < 1e-9, "roots near T: " + std::to_string(near));
    if (o.pass) o.detail << "a = " << num(sp.a) << ", scale = " << num(sp.scale);
  });

  criterion(4, "FHN oscillation dichotomy over 2e5 steps", [&](Outcome& o) {
    if (!have_search) throw VerificationError("no e_o");
    double amp[2];
    int i = 0;
    for (double eps : {-0.05, 0.05}) {
      const FHNPerturbation p = fhn_perturbation(search.e_o, search.g_eo, eps);
      const FixedPoint fp = fhn_fixed_point(model, p.dc);
      const Trajectory tr = fhn_simulate(model, p.delta, 200000, fp.xbar + 0.05, fp.ybar);
      o.check(!tr.diverged, "diverged at eps = " + num(eps));
      amp[i++] = oscillation_amplitude(tr.x).amplitude;
    }
    o.check(amp[0] > 0.1, "eps=-0.05 amplitude " + num(amp[0]) + " <= 0.1");
    o.check(amp[1] < 1e-3, "eps=+0.05 amplitude " + num(amp[1]) + " >= 1e-3");
    if (o.pass) o.detail << "amplitudes " << num(amp[0]) << ", " << num(amp[1]);
  });
}

void pcr_grid() {
  criterion(5, "PCR bound on 9x9 grid", [](Outcome& o) {
    double worst_gap = -INFINITY, worst_match = 0.0;
    for (int i = 1; i <= 9; ++i) {
      for (int j = 1; j <= 9; ++j) {
        const double w = kPi * i / 10.0;
        const double th = -kPi + 2.0 * kPi * j / 10.0;
        const PcrSearchResult r = pcr_max_search(w, th, 4, 20000, 2024);
        worst_gap = std::max(worst_gap, r.best - r.bound);
        o.check(r.best <= r.bound + 1e-6, "best above bound at (" + num(w) + ", " + num(th) + ")");
        const AllPassSpec sp = allpass_phase_match(w, th);
        const double rate = logderiv(sp.tf(), w).phase_rate;
        worst_match = std::max(worst_match, std::abs(rate - r.bound));
      }
    }
    o.check(worst_match <= 1e-9, "matched first-order misses bound by " + num(worst_match));
    if (o.pass) o.detail << "max(best - bound) = " << num(worst_gap) << ", match err " << num(worst_match);
  });
}

void maglev_chain() {
  criterion(6, "maglev chain", [](Outcome& o) {
    const MaglevParams prm{1.0, 1.0, 0.1, 0.01};
    const RationalTF gd = maglev_zoh(prm);
    double worst = 0.0;
    for (int i = 0; i < 32; ++i) {
      const cplx z = std::polar(0.6 + 0.3 * (i % 4), 0.1 + 2.0 * kPi * i / 32.0);
      const cplx ref = zoh_oracle(prm, z);
      worst = std::max(worst, std::abs(gd(z) - ref) / std::abs(ref));
    }
    o.check(worst <= 1e-8, "ZOH oracle mismatch " + num(worst));
    const double dc = maglev_dc_gain(prm);
    o.check(std::abs(dc - 1.0) <= 1e-12, "g_d(1) - 1 = " + num(dc - 1.0));
    const double th0 = logderiv(gd, 0.0).phase_rate;
    o.check(th0 < 0.0, "theta'(0) = " + num(th0));
    const RIRStatus s = exact_rir_analyze(gd).status;
    o.check(s == RIRStatus::not_exact, "g_d verdict " + to_string(s));
    const MaglevBound b = maglev_upper_bound(prm, 0.01);
    o.check(b.validated, "compensation validation: max A' = " + num(b.max_gain_rate));
    const RIRStatus sc = exact_rir_analyze(gd * highpass(b.a, b.b)).status;
    o.check(sc == RIRStatus::exact_sufficient, "compensated verdict " + to_string(sc));

    std::vector<double> ratios;
    for (double T : {0.1, 0.01, 0.001}) ratios.push_back(maglev_upper_bound({1.0, 1.0, 0.01, T}, 0.01).ratio);
    o.check(ratios[0] > ratios[1] && ratios[1] > ratios[2] && ratios[2] > 1.0,
            "ratios " + num(ratios[0]) + ", " + num(ratios[1]) + ", " + num(ratios[2]));
    const MaglevBound lim = maglev_upper_bound({1.0, 1.0, 1e-6, 0.01}, 0.01);
    const double want = maglev_tau_limit(1.0, 0.01, 0.01);
    const double err = std::abs(lim.P / lim.abar - want) / std::abs(want);
    o.check(err <= 1e-3, "tau limit rel err " + num(err));
    if (o.pass) {
      o.detail << "ratio " << num(b.ratio) << ", T-sweep " << num(ratios[0]) << " > " << num(ratios[1])
               << " > " << num(ratios[2]) << ", tau-limit err " << num(err);
    }
  });
}

void lemma_suites() {
  criterion(7, "all-pass PCR bounds and gain-phase integral suites", [](Outcome& o) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bad4 = 0, bad4eq = 0;
    for (int t = 0; t < 200; ++t) {
      const int order = t % 5;
      RationalTF f = RationalTF::constant(u(rng) < 0.5 ? 1.0 : -1.0);
      for (int k = 0; k < order; ++k) {
        const double a = 1.9 * u(rng) - 0.95;
        f = f * RationalTF({a, 1.0}, {1.0, a});
      }
      const Lemma4Result r = lemma4_bound_check(f, 0.05 + (kPi - 0.1) * u(rng));
      if (!r.holds) ++bad4;
      if (order <= 1 && std::abs(r.rate - r.bound) > 1e-10) ++bad4eq;
    }
    o.check(bad4 == 0, std::to_string(bad4) + " real-pole all-pass bound violations");
    o.check(bad4eq == 0, std::to_string(bad4eq) + " first-order equality misses");

    int bad5 = 0;
    for (int t = 0; t < 200; ++t) {
      const double ac = 0.02 + 0.96 * u(rng);
      const double bc = (2.0 * u(rng) - 1.0) * 2.0 * std::sqrt(ac) * 0.999;
      const double w = 0.05 + (kPi - 0.1) * u(rng);
      try {
        const Lemma5Witness wt = lemma5_construct(ac, bc, w);
        if (!(wt.phase_gap <= 1e-9 && wt.rate_r > wt.rate_c)) ++bad5;
      } catch (const Error&) {
        ++bad5;
      }
    }
    o.check(bad5 == 0, std::to_string(bad5) + " complex-to-real pair witnesses failed");

    int bad6 = 0, badc = 0;
    double worst_c = 0.0;
    for (int t = 0; t < 20; ++t) {
      const RationalTF f = random_min_phase(rng);
      if (!lemma6_bound_check(f).holds()) ++bad6;
      const double w = 0.1 + (kPi - 0.2) * u(rng);
      const double err = std::abs(gain_phase_integral(f, w) - unwrapped_phase(f, w));
      worst_c = std::max(worst_c, err);
      if (err > 1e-4) ++badc;
    }
    o.check(bad6 == 0, std::to_string(bad6) + " minimum-phase bound violations");
    o.check(badc == 0, std::to_string(badc) + " integral mismatches, worst " + num(worst_c));
    if (o.pass) o.detail << "integral worst err " << num(worst_c);
  });
}

void nyquist_soundness() {
  criterion(8, "Nyquist soundness on random G1/G2 loops", [](Outcome& o) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int loops = 0, disagree = 0, attempts = 0;
    while (loops < 100 && attempts < 10000) {
      ++attempts;
      std::vector<cplx> ps;
      const int n = 1 + static_cast<int>(u(rng) * 2);
      if (n == 1) {
        ps.emplace_back((u(rng) < 0.5 ? 1.0 : -1.0) * (1.05 + u(rng)), 0.0);
        ps.emplace_back(1.6 * u(rng) - 0.8, 0.0);
      } else {
        const cplx p = std::polar(1.02 + 0.6 * u(rng), 0.1 + 3.0 * u(rng));
        ps.push_back(p);
        ps.push_back(std::conj(p));
      }
      const RationalTF L =
          RationalTF::from_zpk({1.6 * u(rng) - 0.8}, ps, (u(rng) < 0.5 ? -1.0 : 1.0) * 4.0 * u(rng));
      double closest = INFINITY;
      for (cplx r : closed_loop_poles(L).expanded()) closest = std::min(closest, std::abs(std::abs(r) - 1.0));
      if (closest < 1e-6) continue;
      ++loops;
      const Lemma1Result l1 = lemma1_check(L, n);
      if (l1.holds != l1.nyquist_holds) ++disagree;
    }
    o.check(loops == 100, "only " + std::to_string(loops) + " loops generated");
    o.check(disagree == 0, std::to_string(disagree) + " contour/root disagreements");

    int marginal = 0, mismatch = 0;
    for (int t = 0; t < 400 && marginal < 30; ++t) {
      const cplx p = std::polar(1.02 + 0.3 * u(rng), 0.2 + 2.5 * u(rng));
      const RationalTF g = RationalTF::from_zpk({2.0 * u(rng) - 1.0}, {p, std::conj(p)}, 1.0);
      SynthResult s;
      try {
        s = synth_marginal_perturbation(g);
      } catch (const Error&) {
        continue;
      }
      ++marginal;
      for (double scale : {1.0, 0.999, 1.001}) {
        const StabilityVerdict v = marginal_verdict(g * (scale * s.f), s.analysis.cls.peak_omega);
        if (!v.roots_agree) ++mismatch;
        if (scale == 1.0 && !v.single_mode) ++mismatch;
      }
    }
    o.check(marginal >= 10, "only " + std::to_string(marginal) + " marginal loops");
    o.check(mismatch == 0, std::to_string(mismatch) + " marginal verdict mismatches");
    if (o.pass) o.detail << loops << " loops, " << marginal << " marginal syntheses";
  });
}

void hygiene() {
  criterion(9, "numerical hygiene", [](Outcome& o) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> w(0.05, kPi - 0.05), u(-1.0, 1.0);
    const double h = 1e-6;
    int bad = 0;
    for (int t = 0; t < 1000; ++t) {
      const RationalTF g = random_tf(rng);
      const double om = w(rng);
      const DerivativeSample s = logderiv(g, om);
      auto lg = [&](double x) { return std::log(std::abs(g(std::polar(1.0, x)))); };
      const double fa = (lg(om + h) - lg(om - h)) / (2 * h);
      const double ft = (unwrapped_phase(g, om + h) - unwrapped_phase(g, om - h)) / (2 * h);
      if (std::abs(s.gain_rate - fa) > 1e-4 * std::max(1.0, std::abs(fa)) ||
          std::abs(s.phase_rate - ft) > 1e-4 * std::max(1.0, std::abs(ft))) {
        ++bad;
      }
    }
    o.check(bad == 0, std::to_string(bad) + " derivative mismatches");

    double worst = 0.0;
    for (int t = 0; t < 300; ++t) {
      const int deg = 1 + t % 12;
      std::vector<cplx> r;
      while (static_cast<int>(r.size()) < deg) {
        if (deg - static_cast<int>(r.size()) >= 2 && u(rng) > 0.0) {
          const cplx c(1.5 * u(rng), 1.5 * u(rng));
          r.push_back(c);
          r.push_back(std::conj(c));
        } else {
          r.emplace_back(1.5 * u(rng), 0.0);
        }
      }
      worst = std::max(worst, match_error(r, root_list(Polynomial::from_roots(r))));
    }
    o.check(worst <= 1e-6, "root reconstruction error " + num(worst));
    if (o.pass) o.detail << "worst root error " << num(worst);
  });
}

}  // namespace

int main() {
  fhn_criteria();
  pcr_grid();
  maglev_chain();
  lemma_suites();
  nyquist_soundness();
  hygiene();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
