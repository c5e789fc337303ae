#pragma once

// Run configuration: line-oriented `key = value` files with `#` comments.
// Command-line flags use the same keys with '-' in place of '_'.

#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "eba/error.hpp"
#include "eba/format.hpp"

namespace eba {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string subcommand;
  double alpha = 0.015625;
  double gamma = 1.0;
  int grid = 64;
  double dt = 0.01;
  double t_end = 10.0;
  std::string forcing = "kolmogorov";  // kolmogorov | zero | file
  int s = 4;
  double lambda = 0.0;                 // 0: the lambda(s) of the lower-bound construction
  std::string forcing_file;
  std::string init = "random";         // random | kolmogorov | zero | file
  std::string init_file;
  double init_amplitude = 1.0;         // ||omega(0)||_{L2} for random data
  std::uint64_t seed = 1;
  std::string output;                  // empty: standard output
  std::string checkpoint_out;
  int checkpoint_every = 0;
  int observe_every = 10;
  int threads = 0;                     // 0: EBA_THREADS, then hardware
  double delta = 0.35;
  std::string suite = "all";
  int n_vectors = 8;
  int renorm_every = 10;
  double t_transient = -1.0;           // < 0: 50 / gamma
  double t_average = -1.0;             // < 0: 500 / gamma
  double tol = 1e-10;                  // lattice/Poisson agreement tolerance
  int oracle_depth = 200;
  int trials = 1000;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

using ConfigMember = std::variant<double RunConfig::*, int RunConfig::*, std::uint64_t RunConfig::*,
                                  std::string RunConfig::*>;

struct ConfigKey {
  const char* name;
  ConfigMember member;
};

inline const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"subcommand", &RunConfig::subcommand},
      {"alpha", &RunConfig::alpha},
      {"gamma", &RunConfig::gamma},
      {"grid", &RunConfig::grid},
      {"dt", &RunConfig::dt},
      {"t_end", &RunConfig::t_end},
      {"forcing", &RunConfig::forcing},
      {"s", &RunConfig::s},
      {"lambda", &RunConfig::lambda},
      {"forcing_file", &RunConfig::forcing_file},
      {"init", &RunConfig::init},
      {"init_file", &RunConfig::init_file},
      {"init_amplitude", &RunConfig::init_amplitude},
      {"seed", &RunConfig::seed},
      {"output", &RunConfig::output},
      {"checkpoint_out", &RunConfig::checkpoint_out},
      {"checkpoint_every", &RunConfig::checkpoint_every},
      {"observe_every", &RunConfig::observe_every},
      {"threads", &RunConfig::threads},
      {"delta", &RunConfig::delta},
      {"suite", &RunConfig::suite},
      {"n_vectors", &RunConfig::n_vectors},
      {"renorm_every", &RunConfig::renorm_every},
      {"t_transient", &RunConfig::t_transient},
      {"t_average", &RunConfig::t_average},
      {"tol", &RunConfig::tol},
      {"oracle_depth", &RunConfig::oracle_depth},
      {"trials", &RunConfig::trials},
  };
  return keys;
}

inline const ConfigKey* find_config_key(std::string_view name) {
  for (const auto& k : config_keys())
    if (name == k.name) return &k;
  return nullptr;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
bool parse_number(std::string_view text, T& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && first != last;
}

}  // namespace detail

/// Assigns one key from its textual value. `where` prefixes error messages.
inline void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value,
                             const std::string& where = "") {
  const ConfigKey* k = find_config_key(key);
  if (!k) throw ParameterError(where + "unknown configuration key '" + std::string(key) + "'");
  std::visit(
      [&](auto member) {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, std::string>) {
          cfg.*member = std::string(value);
        } else {
          T parsed{};
          if (!detail::parse_number(value, parsed)) {
            const char* kind = std::is_floating_point_v<T> ? "a real number" : "an integer";
            throw ParameterError(where + "key '" + std::string(key) + "' expects " + kind + ", got '" +
                                 std::string(value) + "'");
          }
          cfg.*member = parsed;
        }
      },
      k->member);
}

inline std::string config_value_text(const RunConfig& cfg, const ConfigKey& k) {
  return std::visit(
      [&](auto member) -> std::string {
        using T = std::remove_cvref_t<decltype(cfg.*member)>;
        if constexpr (std::is_same_v<T, std::string>)
          return cfg.*member;
        else if constexpr (std::is_floating_point_v<T>)
          return format_double(cfg.*member);
        else
          return std::to_string(cfg.*member);
      },
      k.member);
}

/// Parses `key = value` lines into `base`.
inline RunConfig parse_config_text(std::string_view text, RunConfig base = {}) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParameterError(where + "expected 'key = value'");
    set_config_value(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), where);
  }
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), std::move(base));
}

/// One `key = value` line per key, in table order.
inline std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& k : config_keys()) {
    out += k.name;
    out += " = ";
    out += config_value_text(cfg, k);
    out += '\n';
  }
  return out;
}

inline std::string config_hash(const RunConfig& cfg) { return hex64(fnv1a64(serialize_config(cfg))); }

inline bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

/// Checks ranges and enumerations for the selected subcommand.
inline void validate_config(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ParameterError(msg);
  };
  need(c.alpha > 0.0, "alpha must be positive");
  need(c.gamma > 0.0, "gamma must be positive");
  need(c.delta > 0.0, "delta must be positive");
  need(c.threads >= 0, "threads must be >= 0");
  const bool dyn = c.subcommand == "simulate" || c.subcommand == "lyapunov";
  if (dyn) {
    need(is_power_of_two(c.grid) && c.grid >= 32, "grid must be a power of two >= 32");
    need(c.dt > 0.0, "dt must be positive");
    need(c.t_end >= 0.0, "t_end must be >= 0");
    need(c.forcing == "kolmogorov" || c.forcing == "zero" || c.forcing == "file",
         "forcing must be kolmogorov, zero or file");
    need(c.init == "random" || c.init == "kolmogorov" || c.init == "zero" || c.init == "file",
         "init must be random, kolmogorov, zero or file");
    need(c.forcing != "file" || !c.forcing_file.empty(), "forcing = file requires forcing_file");
    need(c.init != "file" || !c.init_file.empty(), "init = file requires init_file");
    need(c.init != "kolmogorov" || c.forcing == "kolmogorov", "init = kolmogorov requires forcing = kolmogorov");
    need(c.lambda >= 0.0, "lambda must be >= 0");
    need(c.observe_every >= 0 && c.checkpoint_every >= 0, "observe_every and checkpoint_every must be >= 0");
  }
  if (c.subcommand == "lyapunov") {
    need(c.n_vectors >= 1, "n_vectors must be >= 1");
    need(c.renorm_every >= 1, "renorm_every must be >= 1");
  }
  if (c.subcommand == "instability") {
    need(c.s >= 1, "s must be >= 1");
    need(c.oracle_depth >= 0, "oracle_depth must be >= 0");
  }
  if (c.subcommand == "verify") {
    static constexpr std::array<std::string_view, 7> suites = {"lattice-F", "poisson-F", "k1-bound", "psi",
                                                                "rho-l2",    "trace-k2",  "all"};
    bool ok = false;
    for (auto s : suites) ok = ok || c.suite == s;
    need(ok, "unknown verify suite '" + c.suite + "'");
    need(c.trials >= 1, "trials must be >= 1");
    need(c.tol > 0.0, "tol must be positive");
  }
}

}  // namespace eba
