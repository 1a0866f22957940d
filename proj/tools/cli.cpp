#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "imtrack/csv.hpp"
#include "imtrack/error.hpp"
#include "imtrack/np.hpp"
#include "imtrack/rate.hpp"
#include "imtrack/sim.hpp"
#include "imtrack/synth.hpp"

namespace imtrack::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

namespace {

struct Flags {
  std::optional<double> m, L, rho, eps_scale;
  std::optional<int> n, grid, T, k;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config, algorithm;
  std::string out = ".";
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json load_config(const Flags& f) {
  json cfg = json::object();
  if (f.config) {
    std::ifstream in(*f.config);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config '" + *f.config + "'");
    try {
      cfg = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::InvalidConfig, "config '" + *f.config + "': " + e.what());
    }
    if (!cfg.is_object()) throw Error(ErrorCode::InvalidConfig, "config root must be an object");
  }
  if (f.m) cfg["m"] = *f.m;
  if (f.L) cfg["L"] = *f.L;
  if (f.n) cfg["n"] = *f.n;
  if (f.grid) cfg["grid"] = *f.grid;
  if (f.T) cfg["T"] = *f.T;
  if (f.k) cfg["k"] = *f.k;
  if (f.seed) cfg["seed"] = *f.seed;
  if (f.rho) cfg["rho"] = *f.rho;
  if (f.eps_scale) cfg["eps_scale"] = *f.eps_scale;
  if (f.algorithm) cfg["algorithm"] = *f.algorithm;
  return cfg;
}

template <class T>
T field(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw Error(ErrorCode::InvalidConfig, "missing field '" + key + "'");
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "field '" + key + "': " + e.what());
  }
}

template <class T>
std::optional<T> optional_field(const json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg.at(key).is_null()) return std::nullopt;
  return field<T>(cfg, key);
}

class Outputs {
 public:
  Outputs(std::string command, const Flags& flags) : command_(std::move(command)), flags_(flags) {
    std::error_code ec;
    fs::create_directories(flags.out, ec);
    if (ec) throw Error(ErrorCode::InvalidConfig, "cannot create output directory '" + flags.out + "'");
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = fs::path(flags_.out) / name;
    std::ofstream os(path, std::ios::binary);
    os << content;
    os.close();
    if (!os) throw std::runtime_error("failed to write " + path.string());
    artifacts_.push_back({{"path", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void finish() {
    json manifest = {{"command", command_},
                     {"config", flags_.config ? json(*flags_.config) : json(nullptr)},
                     {"out_dir", flags_.out},
                     {"version", kVersion},
                     {"timestamp", timestamp()},
                     {"artifacts", artifacts_}};
    const fs::path path = fs::path(flags_.out) / "manifest.json";
    std::ofstream os(path, std::ios::binary);
    os << manifest.dump(2) << "\n";
  }

 private:
  static std::string timestamp() {
    std::time_t now = std::time(nullptr);
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::strtoll(sde, nullptr, 10));
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::string command_;
  const Flags& flags_;
  json artifacts_ = json::array();
};

AlgorithmParams random_params(double m, double L, int k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ua(0.0, 2.0 / L), ub(-0.5, 0.5);
  AlgorithmParams p;
  p.k = k;
  p.m = m;
  p.L = L;
  for (int j = 0; j <= k; ++j) p.alpha.push_back(ua(rng));
  for (int j = 0; j < k; ++j) p.beta.push_back(ub(rng));
  validate(p);
  return p;
}

AlgorithmParams resolve_params(const std::string& name, const json& cfg, int default_n) {
  if (name == "custom") {
    if (cfg.contains("params")) {
      try {
        return cfg.at("params").get<AlgorithmParams>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("field 'params': ") + e.what());
      }
    }
    if (cfg.contains("params_file")) {
      const std::string path = field<std::string>(cfg, "params_file");
      std::ifstream in(path);
      if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open params file '" + path + "'");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidConfig, "params file '" + path + "': " + e.what());
      }
      if (j.contains("params")) j = j.at("params");
      return j.get<AlgorithmParams>();
    }
    throw Error(ErrorCode::InvalidConfig, "algorithm 'custom' needs 'params' or 'params_file'");
  }
  const double m = field<double>(cfg, "m");
  const double L = field<double>(cfg, "L");
  if (name == "optimal") {
    const int n = optional_field<int>(cfg, "n").value_or(default_n);
    return synthesize(m, L, n).params;
  }
  if (name == "heavy_ball") return heavy_ball_params(m, L);
  if (name == "gradient_descent") return gradient_descent_params(m, L);
  if (name == "random") {
    return random_params(m, L, optional_field<int>(cfg, "k").value_or(2),
                         optional_field<std::uint64_t>(cfg, "seed").value_or(0));
  }
  throw Error(ErrorCode::InvalidConfig, "unknown algorithm '" + name + "'");
}

std::string default_algorithm(const json& cfg) {
  if (cfg.contains("algorithm")) return field<std::string>(cfg, "algorithm");
  if (cfg.contains("params") || cfg.contains("params_file")) return "custom";
  return "optimal";
}

QuadraticCostSpec parse_spec(const json& cfg) {
  const auto a = field<std::vector<std::vector<double>>>(cfg, "a");
  if (!cfg.contains("delta")) throw Error(ErrorCode::InvalidConfig, "missing field 'delta'");
  const json& d = cfg.at("delta");
  QuadraticCostSpec spec;
  const double c = optional_field<double>(cfg, "c").value_or(0.0);
  if (d.contains("diag")) {
    spec = QuadraticCostSpec::diagonal(field<std::vector<double>>(d, "diag"), a, c);
  } else if (d.contains("full")) {
    const auto rows = field<std::vector<std::vector<double>>>(d, "full");
    Eigen::MatrixXd mtx(rows.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) throw Error(ErrorCode::InvalidConfig, "field 'delta.full' must be square");
      for (std::size_t j = 0; j < rows.size(); ++j) mtx(i, j) = rows[i][j];
    }
    spec = QuadraticCostSpec::full(mtx, a, c);
  } else {
    throw Error(ErrorCode::InvalidConfig, "field 'delta' needs 'diag' or 'full'");
  }
  if (auto p = optional_field<int>(cfg, "p"); p && *p != spec.p) {
    throw Error(ErrorCode::InvalidConfig, "field 'p' disagrees with delta dimension");
  }
  return spec;
}

std::vector<Eigen::VectorXd> make_init(const json& cfg, const AlgorithmParams& params,
                                       const QuadraticCostSpec& spec) {
  if (auto off = optional_field<std::vector<double>>(cfg, "init_offset")) {
    if (static_cast<int>(off->size()) != spec.p) {
      throw Error(ErrorCode::InvalidConfig, "field 'init_offset' has wrong dimension");
    }
    return default_init(params, spec, Eigen::Map<const Eigen::VectorXd>(off->data(), off->size()));
  }
  return default_init(params, spec);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json trace_summary(const std::string& name, const AlgorithmParams& params, const TrajectoryTrace& tr) {
  const int T = static_cast<int>(tr.times.size()) - 1;
  return {{"algorithm", name},
          {"params", params},
          {"T", T},
          {"fitted_rate", optional_number(tr.fitted_rate)},
          {"converged_to_floor", tr.converged_to_floor},
          {"steady_state_error", tr.steady_state_error},
          {"steady_state_window", default_window(T)},
          {"final_error", tr.errors.back()}};
}

int cmd_synth(const Flags& flags, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(flags);
  const double m = field<double>(cfg, "m");
  const double L = field<double>(cfg, "L");
  const int n = field<int>(cfg, "n");
  require_sector(m, L);
  Outputs files("synth", flags);
  if (L == m) {
    err << "notice: degenerate sector (L == m); optimal rate is 0 and no recursion is synthesized\n";
    files.write_json("synthesis.json",
                     {{"m", m}, {"L", L}, {"n", n}, {"rho", 0.0}, {"degenerate_sector", true}});
    files.finish();
    out << "rho=0 kappa=1 (degenerate sector)\n";
    return 0;
  }
  const SynthesisReport rep = synthesize(m, L, n);
  json j = rep;
  j["degenerate_sector"] = false;
  files.write_json("synthesis.json", j);
  files.finish();
  out << "rho=" << fmt(rep.rho) << " kappa=" << fmt(rep.params.kappa()) << " k=" << rep.params.k
      << " alphas=" << rep.params.alpha.size() << " betas=" << rep.params.beta.size() << "\n";
  return 0;
}

int cmd_analyze(const Flags& flags, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(flags);
  const std::string name = default_algorithm(cfg);
  const std::optional<int> n = optional_field<int>(cfg, "n");
  const AlgorithmParams params = resolve_params(name, cfg, n.value_or(1));
  const TransferModel model = build_transfer(params);
  RateOptions opts;
  opts.grid = optional_field<int>(cfg, "grid").value_or(opts.grid);
  const RateReport rep = sup_rate(model, params.m, params.L, opts, n);
  const int integrators = integrator_count(model);

  Outputs files("analyze", flags);
  json j = rep;
  j["algorithm"] = name;
  j["params"] = params;
  j["integrator_count"] = integrators;
  const bool applicable = n && rep.stable && integrators >= *n;
  j["bound_applicable"] = applicable;
  files.write_json("rate.json", j);
  std::ostringstream csv;
  write_samples_csv(csv, rep);
  files.write("rate_samples.csv", csv.str());
  files.finish();

  out << "sup_rate=" << fmt(rep.sup_rate) << " argmax_lambda=" << fmt(rep.argmax_lambda)
      << " integrators=" << integrators << " stable=" << (rep.stable ? "true" : "false");
  if (n) out << " bound=" << fmt(*rep.bound) << " meets_bound=" << (rep.meets_bound ? "true" : "false");
  out << "\n";
  if (!rep.stable) err << "warning: algorithm is not stable (sup_rate " << fmt(rep.sup_rate) << ")\n";
  if (applicable && !rep.meets_bound) {
    err << "BOUND VIOLATION: stable algorithm with " << integrators << " integrators beats the rate bound "
        << fmt(*rep.bound) << "; this indicates a toolkit defect\n";
    return 1;
  }
  return 0;
}

int cmd_simulate(const Flags& flags, std::ostream& out, std::ostream&) {
  const json cfg = load_config(flags);
  const std::string name = default_algorithm(cfg);
  const QuadraticCostSpec spec = parse_spec(cfg);
  const AlgorithmParams params = resolve_params(name, cfg, spec.order());
  const int T = field<int>(cfg, "T");
  if (T <= params.k) {
    throw Error(ErrorCode::InvalidConfig, "field 'T' must exceed k = " + std::to_string(params.k));
  }
  const TrajectoryTrace tr = run(params, spec, T, make_init(cfg, params, spec));
  Outputs files("simulate", flags);
  std::ostringstream csv;
  write_trace_csv(csv, tr);
  files.write("trace_" + name + ".csv", csv.str());
  files.write_json("summary.json", trace_summary(name, params, tr));
  files.finish();
  out << "algorithm=" << name << " steady_state_error=" << fmt(tr.steady_state_error) << " fitted_rate="
      << (tr.fitted_rate ? fmt(*tr.fitted_rate) : std::string("none")) << "\n";
  return 0;
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> names;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) names.push_back(item);
  return names;
}

int cmd_compare(const Flags& flags, std::ostream& out, std::ostream&) {
  const json cfg = load_config(flags);
  std::vector<std::string> names;
  if (flags.algorithm) {
    names = split_names(*flags.algorithm);
  } else if (cfg.contains("algorithms")) {
    names = field<std::vector<std::string>>(cfg, "algorithms");
  } else {
    names = split_names(default_algorithm(cfg));
  }
  if (names.empty()) throw Error(ErrorCode::InvalidConfig, "no algorithms to compare");
  const QuadraticCostSpec spec = parse_spec(cfg);
  const int T = field<int>(cfg, "T");

  std::vector<TrajectoryTrace> traces;
  json summaries = json::array();
  for (const auto& name : names) {
    const AlgorithmParams params = resolve_params(name, cfg, spec.order());
    if (T <= params.k) {
      throw Error(ErrorCode::InvalidConfig, "field 'T' must exceed k = " + std::to_string(params.k));
    }
    traces.push_back(run(params, spec, T, make_init(cfg, params, spec)));
    summaries.push_back(trace_summary(name, params, traces.back()));
  }

  std::ostringstream csv;
  csv << "t";
  for (int i = 0; i < spec.p; ++i) csv << ",xstar_" << i;
  for (const auto& name : names) {
    csv << ",err_" << name;
    for (int i = 0; i < spec.p; ++i) csv << ",x_" << name << "_" << i;
  }
  csv << "\n";
  for (int t = 0; t <= T; ++t) {
    csv << t;
    for (int i = 0; i < spec.p; ++i) csv << ',' << csv_number(traces[0].optima[t](i));
    for (const auto& tr : traces) {
      csv << ',' << csv_number(tr.errors[t]);
      for (int i = 0; i < spec.p; ++i) csv << ',' << csv_number(tr.iterates[t](i));
    }
    csv << "\n";
  }
  Outputs files("compare", flags);
  files.write("compare.csv", csv.str());
  files.write_json("compare.json", {{"T", T}, {"algorithms", summaries}});
  files.finish();
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << names[i] << ": steady_state_error=" << fmt(traces[i].steady_state_error) << "\n";
  }
  return 0;
}

int cmd_np_check(const Flags& flags, std::ostream& out, std::ostream&) {
  const json cfg = load_config(flags);
  const double m = field<double>(cfg, "m");
  const double L = field<double>(cfg, "L");
  const int n = field<int>(cfg, "n");
  const double bound = rate_lower_bound(m, L, n);
  const double rho = optional_field<double>(cfg, "rho").value_or(bound);
  const double delta = optional_field<double>(cfg, "eps_scale").value_or(1e-3);
  const GainMarginProblem prob = GainMarginProblem::with_default_perturbations(m, L, n, rho, delta);
  const double limit = feasibility_limit(rho, n, m, L);
  const PickMatrixReport pick = pick_matrix(prob);
  Outputs files("np-check", flags);
  files.write_json("np_check.json", {{"m", m},
                                     {"L", L},
                                     {"n", n},
                                     {"rho", rho},
                                     {"bound", bound},
                                     {"theta_at_one", theta(1.0, m, L).real()},
                                     {"epsilons", prob.epsilons},
                                     {"feasibility_limit", limit},
                                     {"pick", pick}});
  files.finish();
  out << "rho=" << fmt(rho) << " bound=" << fmt(bound) << " feasibility_limit=" << fmt(limit)
      << " pick_determinant=" << fmt(pick.determinant) << " pick_min_eigenvalue=" << fmt(pick.min_eigenvalue)
      << " feasible=" << (pick.feasible ? "true" : "false") << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Internal-model tracking toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON config file");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--m", flags.m, "lower sector bound");
    sub->add_option("--L", flags.L, "upper sector bound");
    sub->add_option("--n", flags.n, "tracking order / declared integrator count");
    sub->add_option("--grid", flags.grid, "lambda grid size");
    sub->add_option("--T", flags.T, "simulation horizon");
    sub->add_option("--algorithm", flags.algorithm, "optimal|heavy_ball|gradient_descent|custom|random");
    sub->add_option("--seed", flags.seed, "seed for random params");
    sub->add_option("--k", flags.k, "history depth for random params");
  };
  CLI::App* synth = app.add_subcommand("synth", "synthesize the rate-optimal tracking algorithm");
  CLI::App* analyze = app.add_subcommand("analyze", "worst-case rate and integrator count of an algorithm");
  CLI::App* simulate = app.add_subcommand("simulate", "run one algorithm on a polynomial trajectory");
  CLI::App* compare = app.add_subcommand("compare", "run several algorithms on one trajectory");
  CLI::App* np = app.add_subcommand("np-check", "Pick matrix and feasibility limit at a target rate");
  for (CLI::App* s : {synth, analyze, simulate, compare, np}) add_common(s);
  np->add_option("--rho", flags.rho, "target rate (default: the lower bound)");
  np->add_option("--eps-scale", flags.eps_scale, "perturbation scale delta, eps_i = delta * i");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(flags, out, err);
    if (analyze->parsed()) return cmd_analyze(flags, out, err);
    if (simulate->parsed()) return cmd_simulate(flags, out, err);
    if (compare->parsed()) return cmd_compare(flags, out, err);
    if (np->parsed()) return cmd_np_check(flags, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_input_error(e.code()) ? 2 : 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: config: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace imtrack::cli
