#pragma once

// Command-line front end. Exit codes: 0 success, 1 verification FAIL,
// 2 usage or configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "eba/bounds.hpp"
#include "eba/checkpoint.hpp"
#include "eba/config.hpp"
#include "eba/dynamics.hpp"
#include "eba/error.hpp"
#include "eba/format.hpp"
#include "eba/instability.hpp"
#include "eba/lyapunov.hpp"
#include "eba/parallel.hpp"
#include "eba/verify.hpp"

namespace eba {

/// `#`-prefixed header: version, config hash, seed, then the effective config.
inline std::string comment_header(const RunConfig& cfg) {
  std::string h = "# eba " + std::string(kVersion) + "\n";
  h += "# config_hash = " + config_hash(cfg) + "\n";
  h += "# seed = " + std::to_string(cfg.seed) + "\n";
  std::string body = serialize_config(cfg);
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto nl = body.find('\n', pos);
    h += "# " + body.substr(pos, nl - pos) + "\n";
    pos = nl + 1;
  }
  return h;
}

inline nlohmann::ordered_json json_header(const RunConfig& cfg) {
  nlohmann::ordered_json h;
  h["version"] = kVersion;
  h["config_hash"] = config_hash(cfg);
  h["seed"] = cfg.seed;
  nlohmann::ordered_json c;
  for (const auto& k : config_keys()) c[k.name] = config_value_text(cfg, k);
  h["config"] = c;
  return h;
}

namespace detail {

class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
      if (!*file_) throw IoError("cannot open output file " + path);
      out_ = file_.get();
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

inline double effective_lambda(const RunConfig& c) {
  return c.lambda > 0.0 ? c.lambda : lambda_choice(c.s, c.delta, c.alpha, c.gamma);
}

/// Initial state for simulate/lyapunov from the config.
inline SimState build_state(const RunConfig& c) {
  const ModelParams params(c.alpha, c.gamma);
  const FourierGrid g(c.grid);
  SpectralField fcurl(g);
  if (c.forcing == "kolmogorov") {
    fcurl = curl(kolmogorov_forcing({c.s, effective_lambda(c), c.gamma}, g));
  } else if (c.forcing == "file") {
    const Checkpoint cp = read_checkpoint(c.forcing_file);
    if (cp.components.size() != 2) throw IoError("forcing file must hold a two-component vector field");
    if (cp.components[0].grid().n() != c.grid) throw GridMismatch("forcing file grid differs from config grid");
    fcurl = dealias(curl(VectorField(cp.components[0], cp.components[1])));
  }
  SpectralField omega(g);
  double t0 = 0.0;
  if (c.init == "random") {
    omega = random_field(g, c.seed);
    omega *= c.init_amplitude / norm_l2(omega);
  } else if (c.init == "kolmogorov") {
    omega = kolmogorov_vorticity({c.s, effective_lambda(c), c.gamma}, g);
  } else if (c.init == "file") {
    const Checkpoint cp = read_checkpoint(c.init_file);
    if (cp.components.size() != 1) throw IoError("init file must hold a scalar vorticity field");
    if (cp.components[0].grid().n() != c.grid) throw GridMismatch("init file grid differs from config grid");
    omega = cp.components[0];
    t0 = cp.header.time;
  }
  return SimState(std::move(omega), params, std::move(fcurl), t0);
}

inline int run_simulate(const RunConfig& c, std::ostream& out) {
  const SimState init = build_state(c);
  OutputSink sink(c.output, out);
  auto& os = sink.stream();
  os << comment_header(c) << "time,enstrophy_bar,grad_enstrophy_bar,r0_margin\n";
  SimulateOptions opts;
  opts.observe_every = c.observe_every;
  opts.checkpoint_every = c.checkpoint_every;
  opts.on_row = [&](const ObserverRow& r) {
    os << csv_row(r.time, r.enstrophy_bar, r.grad_enstrophy_bar, r.r0_margin) << '\n';
  };
  if (!c.checkpoint_out.empty())
    opts.on_checkpoint = [&](const SimState& s) {
      write_checkpoint(c.checkpoint_out, s.omega, s.params.alpha, s.params.gamma, s.time);
    };
  const Trajectory traj = simulate(init, init.time + c.t_end, c.dt, opts);
  if (!c.checkpoint_out.empty()) {
    const auto& s = traj.final_state;
    write_checkpoint(c.checkpoint_out, s.omega, s.params.alpha, s.params.gamma, s.time);
  }
  return 0;
}

inline int run_lyapunov(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const SimState init = build_state(c);
  LyapunovOptions o;
  o.n_vectors = c.n_vectors;
  o.renorm_every = c.renorm_every;
  o.dt = c.dt;
  o.t_transient = c.t_transient;
  o.t_average = c.t_average;
  o.seed = c.seed;
  o.threads = resolve_threads(c.threads);
  o.warn = [&](const std::string& msg) { err << "warning: " << msg << '\n'; };
  const LyapunovReport rep = lyapunov_spectrum(init, o);
  const double curl_sq = norm_l2_sq(init.forcing_curl);

  OutputSink sink(c.output, out);
  auto& os = sink.stream();
  os << comment_header(c);
  os << "# lyapunov_dimension = " << format_double(rep.lyapunov_dimension) << '\n';
  os << "# dimension_saturated = " << (rep.dimension_saturated ? 1 : 0) << '\n';
  os << "# averaging_time = " << format_double(rep.averaging_time) << '\n';
  os << "# reseeds = " << rep.reseeds << '\n';
  if (curl_sq > 0.0) os << "# upper_bound = " << format_double(upper_bound(c.alpha, c.gamma, curl_sq)) << '\n';
  os << "index,exponent,std_error,partial_sum,trace_bound\n";
  for (std::size_t j = 0; j < rep.exponents.size(); ++j) {
    const double tb = trace_bound_q(static_cast<double>(j + 1), c.alpha, c.gamma, std::sqrt(curl_sq));
    os << csv_row(j + 1, rep.exponents[j], rep.std_errors[j], rep.partial_sums[j], tb) << '\n';
  }
  return 0;
}

inline int run_instability(const RunConfig& c, std::ostream& out) {
  const double lambda = effective_lambda(c);
  const double Lambda = chain_lambda(lambda, c.s, c.alpha);
  const auto reps = analyze_region(c.s, c.delta, c.alpha, c.gamma, Lambda, c.oracle_depth, resolve_threads(c.threads));
  OutputSink sink(c.output, out);
  auto& os = sink.stream();
  os << comment_header(c) << "# lambda = " << format_double(lambda) << '\n';
  os << "s,t,r,delta,Lambda,sigma,sigma_lower_bound,sigma_upper_bound,oracle_sigma\n";
  for (const auto& r : reps)
    os << csv_row(r.s, r.t, r.r, r.delta, r.Lambda, r.sigma, r.sigma_lower_bound, r.sigma_upper_bound,
                  r.oracle_sigma)
       << '\n';
  return 0;
}

inline int run_bounds(const RunConfig& c, std::ostream& out) {
  nlohmann::ordered_json j;
  j["header"] = json_header(c);
  j["alpha"] = c.alpha;
  j["gamma"] = c.gamma;
  const auto k = lower_bound_constant();
  try {
    const DimensionReport r = lower_bound(c.alpha, c.gamma, k);
    j["curl_g_sq"] = r.curl_g_sq;
    j["upper"] = r.upper;
    j["lower"] = r.lower;
    j["c1"] = r.constant_c1;
    j["delta_star"] = r.delta_star;
    j["s"] = r.s;
  } catch (const CertificationError& e) {
    j["curl_g_sq"] = nullptr;
    j["upper"] = nullptr;
    j["lower"] = nullptr;
    j["c1"] = k.c1;
    j["delta_star"] = k.delta_star;
    j["s"] = kolmogorov_s_for(c.alpha);
    j["error"] = e.what();
  }
  OutputSink sink(c.output, out);
  sink.stream() << j.dump(2) << '\n';
  return 0;
}

inline int run_verify_cmd(const RunConfig& c, std::ostream& out) {
  VerifyOptions o;
  o.seed = c.seed;
  o.trials = c.trials;
  o.tol = c.tol;
  o.threads = resolve_threads(c.threads);
  const auto results = run_verify(c.suite, o);
  OutputSink sink(c.output, out);
  auto& os = sink.stream();
  bool pass = true;
  bool first = true;
  for (const auto& r : results) {
    if (!first) os << '\n';
    first = false;
    os << comment_header(c) << "# check = " << r.name << '\n' << "# result = " << status(r.pass) << '\n';
    os << r.columns << '\n';
    for (const auto& row : r.rows) os << row << '\n';
    pass = pass && r.pass;
  }
  return pass ? 0 : 1;
}

}  // namespace detail

/// Keys accepted as flags by each subcommand.
inline const std::map<std::string, std::vector<std::string>>& subcommand_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"simulate",
       {"alpha", "gamma", "grid", "dt", "t_end", "forcing", "s", "lambda", "delta", "forcing_file", "init",
        "init_file", "init_amplitude", "seed", "output", "checkpoint_out", "checkpoint_every", "observe_every",
        "threads"}},
      {"lyapunov",
       {"alpha", "gamma", "grid", "dt", "forcing", "s", "lambda", "delta", "forcing_file", "init", "init_file",
        "init_amplitude", "seed", "output", "threads", "n_vectors", "renorm_every", "t_transient", "t_average"}},
      {"instability", {"alpha", "gamma", "s", "lambda", "delta", "oracle_depth", "output", "threads", "seed"}},
      {"bounds", {"alpha", "gamma", "output", "seed"}},
      {"verify", {"suite", "seed", "trials", "tol", "output", "threads"}},
  };
  return keys;
}

inline std::string flag_name(const std::string& key) {
  std::string f = "--" + key;
  for (auto& ch : f)
    if (ch == '_') ch = '-';
  return f;
}

/// Parses argv, merges config file and flags (flags win), runs the subcommand.
inline int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                              std::ostream& err = std::cerr) {
  CLI::App app{"Damped Euler-Bardina attractor dimension toolkit", "eba"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::string> config_path;
  for (const auto& [name, keys] : subcommand_keys()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path[name], "key = value configuration file");
    for (const auto& key : keys) sub->add_option(flag_name(key), raw[name][key]);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  const CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  try {
    RunConfig cfg;
    if (!config_path[name].empty()) cfg = load_config(config_path[name]);
    for (const auto& key : subcommand_keys().at(name))
      if (chosen->count(flag_name(key)) > 0) set_config_value(cfg, key, raw[name][key], flag_name(key) + ": ");
    cfg.subcommand = name;
    validate_config(cfg);
    if (name == "simulate") return detail::run_simulate(cfg, out);
    if (name == "lyapunov") return detail::run_lyapunov(cfg, out, err);
    if (name == "instability") return detail::run_instability(cfg, out);
    if (name == "bounds") return detail::run_bounds(cfg, out);
    return detail::run_verify_cmd(cfg, out);
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace eba
