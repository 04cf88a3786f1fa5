#include "rirkit/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "rirkit/casestudies.hpp"
#include "rirkit/error.hpp"
#include "rirkit/nyquist.hpp"
#include "rirkit/rir.hpp"

namespace rirkit::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kSchema = "rirkit/1";
constexpr double kPi = 3.14159265358979323846;

struct Config {
  std::string command;
  std::string input;
  std::string out_dir;
  std::uint64_t seed = 1;
  int grid = 4096;
  std::optional<double> tol_rate;
  std::optional<double> eps;
  std::optional<int> steps;
  std::vector<std::string> params;
  bool dump = false;
};

class Params {
 public:
  explicit Params(const std::vector<std::string>& kv) {
    for (const auto& s : kv) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw InvalidInput("--param expects key=value, got '" + s + "'");
      values_[s.substr(0, eq)] = s.substr(eq + 1);
    }
  }

  double get(const std::string& key, double fallback) {
    used_.push_back(key);
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw InvalidInput("--param " + key + ": not a number: '" + it->second + "'");
    }
  }

  void reject_unknown() const {
    for (const auto& [k, v] : values_) {
      if (std::find(used_.begin(), used_.end(), k) == used_.end()) {
        throw InvalidInput("unknown --param '" + k + "'");
      }
    }
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> used_;
};

json tf_json(const RationalTF& g) {
  return {{"num", g.num().coeffs()}, {"den", g.den().coeffs()}};
}

RationalTF parse_tf(const json& j) {
  if (!j.is_object() || !j.contains("num") || !j.contains("den")) {
    throw InvalidInput("transfer function JSON needs \"num\" and \"den\" arrays");
  }
  auto vec = [](const json& a, const char* name) {
    if (!a.is_array() || a.empty()) throw InvalidInput(std::string("\"") + name + "\" must be a non-empty array");
    std::vector<double> v;
    for (const auto& x : a) {
      if (!x.is_number()) throw InvalidInput(std::string("\"") + name + "\" must hold numbers");
      v.push_back(x.get<double>());
    }
    return v;
  };
  return RationalTF(vec(j["num"], "num"), vec(j["den"], "den"));
}

json read_input(const std::string& input) {
  if (input.empty()) throw InvalidInput("--input is required for this command");
  std::string text;
  if (input.front() == '{') {
    text = input;
  } else {
    std::ifstream f(input);
    if (!f) throw InvalidInput("cannot read input file '" + input + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    text = ss.str();
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("malformed JSON: ") + e.what());
  }
}

fs::path out_path(const Config& cfg, const std::string& name) {
  const fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory '" + dir.string() + "'");
  return dir / name;
}

class Csv {
 public:
  Csv(const fs::path& p, const std::vector<std::string>& header) : f_(p), cols_(header.size()) {
    if (!f_) throw InvalidInput("cannot write '" + p.string() + "'");
    f_.precision(17);
    row_strings(header);
  }
  void row(const std::vector<double>& v) {
    if (v.size() != cols_) throw NumericalError("csv column mismatch");
    for (std::size_t i = 0; i < v.size(); ++i) f_ << (i ? "," : "") << v[i];
    f_ << '\n';
  }

 private:
  void row_strings(const std::vector<std::string>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) f_ << (i ? "," : "") << v[i];
    f_ << '\n';
  }
  std::ofstream f_;
  std::size_t cols_;
};

json verdict_json(const RIRVerdict& v) {
  return {{"class", to_string(v.cls.class_name)},
          {"n_unstable", v.cls.n_unstable},
          {"pip", v.cls.pip},
          {"peak_omega", v.cls.peak_omega},
          {"peak_gain", v.cls.peak_gain},
          {"peak_unique", v.cls.peak_unique},
          {"theta_p", v.theta_p},
          {"theta_rate", v.theta_rate},
          {"rho", v.rho},
          {"lower_bound", v.lower_bound},
          {"status", to_string(v.status)},
          {"explanation", v.explanation}};
}

json stability_json(const StabilityVerdict& v) {
  json roots = json::array();
  for (const auto& r : v.boundary_roots) {
    roots.push_back({{"re", r.location.real()}, {"im", r.location.imag()}, {"multiplicity", r.multiplicity}});
  }
  return {{"single_mode", v.single_mode},
          {"marginal", v.marginal},
          {"mode", to_string(v.mode)},
          {"boundary_roots", roots},
          {"max_root_modulus", v.max_root_modulus},
          {"certificate", v.certificate},
          {"cond_i", v.cond_i},
          {"cond_iia", v.cond_iia},
          {"cond_iib", v.cond_iib},
          {"nu_o0", v.nu_o0},
          {"roots_agree", v.roots_agree}};
}

json spec_json(const AllPassSpec& s) {
  return {{"c", s.c}, {"a", s.a}, {"scale", s.scale}, {"constant", s.constant}};
}

AnalyzeOptions analyze_options(const Config& cfg) {
  AnalyzeOptions o;
  o.norm.grid = cfg.grid;
  if (cfg.tol_rate) o.rate_tol = *cfg.tol_rate;
  return o;
}

json cmd_analyze(const Config& cfg) {
  const RationalTF g = parse_tf(read_input(cfg.input));
  const RIRVerdict v = exact_rir_analyze(g, analyze_options(cfg));
  json r = verdict_json(v);
  if (!cfg.out_dir.empty()) {
    Csv csv(out_path(cfg, "response.csv"), {"omega", "gain", "gain_db", "phase"});
    for (int i = 0; i <= cfg.grid; ++i) {
      const double w = kPi * i / cfg.grid;
      const double gain = std::abs(g(std::polar(1.0, w)));
      csv.row({w, gain, 20.0 * std::log10(gain), unwrapped_phase(g, w)});
    }
    r["files"] = {"response.csv"};
  }
  return r;
}

json cmd_synth(const Config& cfg) {
  const RationalTF g = parse_tf(read_input(cfg.input));
  const SynthResult s = synth_marginal_perturbation(g, analyze_options(cfg));
  return {{"analysis", verdict_json(s.analysis)},
          {"allpass", spec_json(s.spec)},
          {"f", tf_json(s.f)},
          {"f_norm", s.f_norm},
          {"loop_at_peak", {{"re", s.loop_at_peak.real()}, {"im", s.loop_at_peak.imag()}}},
          {"closed_loop", stability_json(s.verdict)}};
}

json cmd_nyquist(const Config& cfg) {
  const json in = read_input(cfg.input);
  const RationalTF L = parse_tf(in);
  Params prm(cfg.params);
  const int n = static_cast<int>(prm.get("n", unstable_pole_count(L)));
  prm.reject_unknown();

  ContourSpec spec;
  spec.epsilon = cfg.eps.value_or(1e-3);
  spec.samples = cfg.grid;
  const CrossingReport cr = crossing_counts(L, spec);
  const Lemma1Result l1 = lemma1_check(L, n);
  json crossings = json::array();
  for (const auto& c : cr.crossings) {
    crossings.push_back({{"omega", c.omega}, {"real", c.real}, {"direction", c.direction}});
  }
  json r = {{"epsilon", cr.epsilon_used},
            {"nu_plus", cr.nu_plus},
            {"nu_minus", cr.nu_minus},
            {"nu_o", cr.nu_o},
            {"encirclements_cw", cr.encirclements_cw},
            {"crossings", crossings},
            {"n", n},
            {"stable", l1.holds},
            {"nyquist_stable", l1.nyquist_holds},
            {"max_root_modulus", l1.max_root_modulus},
            {"diagnostic", l1.diagnostic}};
  if (!cr.warning.empty()) r["warning"] = cr.warning;
  if (cfg.dump) {
    Csv csv(out_path(cfg, "nyquist.csv"), {"omega", "re", "im"});
    for (int i = 0; i <= cfg.grid; ++i) {
      const double w = -kPi + 2.0 * kPi * i / cfg.grid;
      const cplx v = contour_point(L, spec, w);
      csv.row({w, v.real(), v.imag()});
    }
    r["files"] = {"nyquist.csv"};
  }
  return r;
}

json cmd_pcr_max(const Config& cfg) {
  Params prm(cfg.params);
  const double w = prm.get("omega", 1.0);
  const double th = prm.get("theta", 1.0);
  const int order = static_cast<int>(prm.get("order", 4));
  const int trials = static_cast<int>(prm.get("trials", 20000));
  prm.reject_unknown();
  const PcrSearchResult s = pcr_max_search(w, th, order, trials, cfg.seed);
  return {{"omega", w},         {"theta", th},     {"order", order},
          {"trials", trials},   {"seed", cfg.seed}, {"best", s.best},
          {"bound", s.bound},   {"gap", s.bound - s.best},
          {"best_description", s.description},
          {"evaluated", s.evaluated}, {"skipped", s.skipped}};
}

json cmd_maglev(const Config& cfg) {
  Params prm(cfg.params);
  MaglevParams mp;
  mp.k = prm.get("k", mp.k);
  mp.p = prm.get("p", mp.p);
  mp.tau = prm.get("tau", mp.tau);
  mp.T = prm.get("T", mp.T);
  prm.reject_unknown();
  const double eps = cfg.eps.value_or(0.01);

  const RationalTF gd = maglev_zoh(mp);
  const MaglevCoefficients c = maglev_coefficients(mp);
  const RIRVerdict v = exact_rir_analyze(gd, analyze_options(cfg));
  const MaglevBound b = maglev_upper_bound(mp, eps);
  const RIRVerdict vc = exact_rir_analyze(gd * highpass(b.a, b.b), analyze_options(cfg));
  return {{"params", {{"k", mp.k}, {"p", mp.p}, {"tau", mp.tau}, {"T", mp.T}}},
          {"eps", eps},
          {"coefficients",
           {{"N1", c.N1}, {"N2", c.N2}, {"N3", c.N3},
            {"beta2", c.beta2}, {"beta1", c.beta1}, {"beta0", c.beta0}}},
          {"g_d", tf_json(gd)},
          {"dc_gain", maglev_dc_gain(mp)},
          {"theta_rate0", b.theta_rate0},
          {"analysis", verdict_json(v)},
          {"bound",
           {{"P", b.P}, {"abar", b.abar}, {"ratio", b.ratio}, {"a", b.a}, {"b", b.b},
            {"max_gain_rate", b.max_gain_rate}, {"compensated_rate0", b.compensated_rate0},
            {"validated", b.validated}}},
          {"compensated_analysis", verdict_json(vc)},
          {"lower_bound", 1.0 / v.cls.peak_gain},
          {"upper_bound", b.ratio / v.cls.peak_gain}};
}

FHNModel fhn_model(Params& prm) {
  FHNModel m;
  m.c = prm.get("c", m.c);
  m.alpha = prm.get("alpha", m.alpha);
  m.beta = prm.get("beta", m.beta);
  m.tau = prm.get("tau", m.tau);
  m.d = prm.get("d", m.d);
  m.I = prm.get("I", m.I);
  return m;
}

json fixed_point_json(const FixedPoint& fp) {
  return {{"x", fp.xbar}, {"y", fp.ybar}, {"e", fp.e}, {"residual", fp.residual}};
}

json cmd_fhn_find(const Config& cfg) {
  Params prm(cfg.params);
  const FHNModel m = fhn_model(prm);
  prm.reject_unknown();
  const FHNSearch s = fhn_search_eo(m);
  Csv csv(out_path(cfg, "fig1.csv"), {"e", "inv_norm"});
  for (const auto& p : s.sweep) csv.row({p.e, p.inv_norm});
  const RIRVerdict v0 = exact_rir_analyze(fhn_linearize(m, 0.0), analyze_options(cfg));
  return {{"e_o", s.e_o},
          {"inv_norm", s.inv_norm},
          {"omega_p", s.omega_p},
          {"fixed_point", fixed_point_json(s.fixed_point)},
          {"g_eo", tf_json(s.g_eo)},
          {"analysis", verdict_json(s.analysis)},
          {"g0", tf_json(fhn_linearize(m, 0.0))},
          {"g0_analysis", verdict_json(v0)},
          {"files", {"fig1.csv"}}};
}

json cmd_fhn_sim(const Config& cfg) {
  Params prm(cfg.params);
  const FHNModel m = fhn_model(prm);
  const double r = prm.get("r", 0.5);
  const double dx = prm.get("dx", 0.05);
  const double dy = prm.get("dy", 0.0);
  prm.reject_unknown();
  const double eps = cfg.eps.value_or(-0.05);
  const int steps = cfg.steps.value_or(200000);
  if (steps <= 0) throw InvalidInput("--steps must be positive");

  const FHNSearch s = fhn_search_eo(m);
  const FHNPerturbation p = fhn_perturbation(s.e_o, s.g_eo, eps, r);
  const FixedPoint fp = fhn_fixed_point(m, p.dc);
  double rho = 0.0;
  for (cplx z : closed_loop_poles(p.delta * s.g_eo).expanded()) rho = std::max(rho, std::abs(z));
  const Trajectory tr = fhn_simulate(m, p.delta, steps, fp.xbar + dx, fp.ybar + dy);
  const OscillationReport osc = oscillation_amplitude(tr.x);

  std::ostringstream name;
  name << "fig2_eps_" << eps << ".csv";
  Csv csv(out_path(cfg, name.str()), {"n", "x", "y"});
  for (std::size_t i = 0; i < tr.x.size(); ++i) csv.row({double(i + 1), tr.x[i], tr.y[i]});
  return {{"eps", eps},
          {"e_o", s.e_o},
          {"delta", tf_json(p.delta)},
          {"dc", p.dc},
          {"fixed_point", fixed_point_json(fp)},
          {"init", {{"x", fp.xbar + dx}, {"y", fp.ybar + dy}}},
          {"closed_loop_radius", rho},
          {"steps", steps},
          {"recorded", tr.x.size()},
          {"diverged", tr.diverged},
          {"amplitude", osc.amplitude},
          {"verdict", to_string(osc.verdict)},
          {"files", {name.str()}}};
}

int emit_error(std::ostream& out, std::ostream& err, const std::string& type,
               const std::string& msg, int code) {
  err << "rirkit: " << msg << '\n';
  out << json{{"schema", kSchema}, {"error", {{"type", type}, {"message", msg}, {"exit_code", code}}}}.dump(2)
      << '\n';
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust instability radius toolkit"};
  app.require_subcommand(1);
  Config cfg;

  auto add_common = [&](CLI::App* sub, bool needs_input) {
    auto* in = sub->add_option("--input", cfg.input, "TF JSON file or inline JSON");
    if (needs_input) in->required();
    sub->add_option("--out", cfg.out_dir, "output directory for CSV files");
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--grid", cfg.grid, "frequency grid size")->check(CLI::Range(16, 1 << 22));
    sub->add_option("--tol-rate", cfg.tol_rate, "tolerance on theta' comparisons");
    sub->add_option("--eps", cfg.eps, "epsilon (contour indent or perturbation scale)");
    sub->add_option("--steps", cfg.steps, "simulation steps");
    sub->add_option("--param", cfg.params, "key=value (repeatable)")->take_all();
  };

  struct Entry {
    const char* name;
    const char* help;
    bool needs_input;
    json (*fn)(const Config&);
  };
  const Entry entries[] = {
      {"analyze", "exact RIR analysis of a TF", true, cmd_analyze},
      {"synth", "minimum-norm marginally stabilizing perturbation", true, cmd_synth},
      {"nyquist", "Nyquist crossing counts and closed-loop stability check", true, cmd_nyquist},
      {"pcr-max", "randomized all-pass PCR search", false, cmd_pcr_max},
      {"maglev", "sampled maglev RIR bounds", false, cmd_maglev},
      {"fhn-find", "FHN e_o search and inverse-norm sweep", false, cmd_fhn_find},
      {"fhn-sim", "FHN simulation under delta_f,eps", false, cmd_fhn_sim},
  };
  std::map<CLI::App*, const Entry*> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, e.needs_input);
    if (std::string(e.name) == "nyquist") sub->add_flag("--dump", cfg.dump, "write nyquist.csv");
    subs[sub] = &e;
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return emit_error(out, err, "invalid_input", e.what(), 2);
  }

  const Entry* entry = nullptr;
  for (const auto& [sub, e] : subs) {
    if (sub->parsed()) entry = e;
  }
  cfg.command = entry->name;

  try {
    json r = entry->fn(cfg);
    json report = {{"schema", kSchema}, {"command", cfg.command}};
    report.update(r);
    const std::string text = report.dump(2);
    if (!cfg.out_dir.empty()) {
      std::ofstream f(out_path(cfg, "report.json"));
      f << text << '\n';
    }
    out << text << '\n';
    return 0;
  } catch (const InvalidInput& e) {
    return emit_error(out, err, "invalid_input", e.what(), 2);
  } catch (const PreconditionError& e) {
    return emit_error(out, err, "precondition", e.what(), 3);
  } catch (const VerificationError& e) {
    return emit_error(out, err, "verification", e.what(), 4);
  } catch (const NumericalError& e) {
    return emit_error(out, err, "numerical", e.what(), 4);
  }
}

}  // namespace rirkit::cli
