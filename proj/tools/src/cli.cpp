#include "coinflow/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "coinflow/asymptotics.hpp"
#include "coinflow/exact.hpp"
#include "coinflow/json_report.hpp"
#include "coinflow/simulation.hpp"
#include "coinflow/version.hpp"

namespace coinflow::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invariant_breach:
    case ErrorCode::corrupted_state:
      return kInvariant;
    case ErrorCode::capacity:
    case ErrorCode::too_large:
      return kCapacity;
    case ErrorCode::no_unique_stationary:
      return kVerification;
    default:
      return kUsage;
  }
}

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (flag) {
    if (*flag == 0) raise(ErrorCode::invalid_parameter, "--threads must be at least 1");
    return *flag;
  }
  if (const char* env = std::getenv("COINFLOW_THREADS"); env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0 || v > 4096)
      raise(ErrorCode::invalid_parameter, std::string("COINFLOW_THREADS must be a positive integer, got '") + env + "'");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Output {
  std::string dir = ".";
  std::string prefix;
  std::vector<std::string> written;

  fs::path path(const std::string& suffix) const { return fs::path(dir) / (prefix + suffix); }

  void write(const std::string& suffix, const std::string& content) {
    fs::create_directories(dir);
    const fs::path p = path(suffix);
    std::ofstream f(p, std::ios::binary);
    if (!f) raise(ErrorCode::invalid_parameter, "cannot open " + p.string() + " for writing");
    f << content;
    if (content.empty() || content.back() != '\n') f << '\n';
    if (!f) raise(ErrorCode::invalid_parameter, "failed writing " + p.string());
    written.push_back(p.filename().string());
  }
};

void add_output_options(CLI::App* sub, Output& o, const std::string& default_prefix) {
  o.prefix = default_prefix;
  sub->add_option("--out-dir", o.dir, "Directory for output files")->capture_default_str();
  sub->add_option("--prefix", o.prefix, "File name prefix")->capture_default_str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void write_manifest(Output& o, const std::string& command, const std::vector<std::string>& args,
                    json parameters, double seconds) {
  json m = {
      {"command", command},
      {"args", args},
      {"parameters", std::move(parameters)},
      {"version", kVersion},
      {"timestamp", utc_timestamp()},
      {"wall_seconds", seconds},
  };
  std::vector<std::string> outputs = o.written;
  outputs.push_back(o.prefix + "_manifest.json");
  m["outputs"] = outputs;
  o.write("_manifest.json", m.dump(2));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream s;
  s << "c,count,frequency\n" << std::setprecision(17);
  Balance last = h.window().lo;
  for (Balance c = h.window().lo; c <= h.window().hi; ++c)
    if (h.count(c) > 0) last = c;
  for (Balance c = h.window().lo; c <= last; ++c) s << c << ',' << h.count(c) << ',' << h.frequency(c) << '\n';
  return s.str();
}

// Log-mode cost guard for the tv_to_exact diagnostic.
bool exact_pmf_affordable(const ModelParams& p, std::size_t n) {
  if (p.kind == ModelKind::individual) return true;
  const double others = static_cast<double>(n - 1);
  return others * others / 2 * static_cast<double>(p.money + 2 * p.limit) <= 2e9;
}

struct SimulateArgs {
  std::string model;
  std::string graph;
  Balance money = 0;
  Balance limit = 0;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> burn_in;
  std::uint64_t samples = 0;
  std::uint64_t thin = 1;
  std::uint64_t replicas = 1;
  std::optional<unsigned> threads;
  std::string initial = "even";
  std::optional<std::string> initial_state;
  std::size_t batches = 100;
  std::size_t trace_points = 1000;
  bool skip_exact_tv = false;
  Output out;
};

int cmd_simulate(SimulateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const GraphTopology g = parse_graph_spec(a.graph);
  const ModelParams p{parse_model_kind(a.model), a.money, a.limit};
  validate(p, g.vertex_count());
  if (a.replicas == 0) raise(ErrorCode::invalid_parameter, "--replicas must be at least 1");
  SimulationConfig cfg;
  cfg.seed = a.seed;
  cfg.burn_in = a.burn_in.value_or(default_burn_in(g, p));
  cfg.samples = a.samples;
  cfg.thinning = a.thin;
  cfg.policy = parse_initial_policy(a.initial);
  if (a.initial_state) {
    const Snapshot snap = load_snapshot(*a.initial_state);
    if (snap.params != p || snap.state.balances.size() != g.vertex_count())
      raise(ErrorCode::invalid_state, "snapshot parameters do not match --model/--money/--limit/--graph");
    cfg.initial = snap.state;
  }
  cfg.drift_batches = a.batches;
  cfg.trace_points = a.trace_points;
  const bool collective = p.kind == ModelKind::collective;
  cfg.collectors.bank_trace = collective;
  cfg.collectors.drift = collective;
  cfg.collectors.interactions = collective;
  const unsigned threads = resolve_threads(a.threads);

  const SimulationReport report = simulate_replicas(g, p, cfg, a.replicas, threads);
  const std::size_t n = g.vertex_count();
  const DensePmf empirical = report.histogram.normalized();

  std::optional<double> tv_exact, tv_asym;
  if (!a.skip_exact_tv && report.histogram.total() > 0 && exact_pmf_affordable(p, n))
    tv_exact = tv_distance(empirical, marginal(p.kind, n, p.money, p.limit, PmfMode::log).to_dense());
  if (report.histogram.total() > 0) {
    const SupportWindow w = support(p, n);
    if (!collective) {
      tv_asym = tv_distance(empirical, discretized_shifted_exp(p.temperature(n), p.limit, w.lo, w.hi));
    } else if (p.money > 0 && p.limit > 0) {
      const LaplaceParams lp = laplace_params(p.temperature(n), static_cast<double>(p.limit) / static_cast<double>(p.money));
      tv_asym = tv_distance(empirical, discretized_laplace(lp, w.lo, w.hi));
    }
  }

  a.out.write("_histogram.csv", histogram_csv(report.histogram));
  a.out.write("_diagnostics.json", diagnostics_json(report, tv_exact, tv_asym).dump(2));
  if (collective) {
    std::ostringstream s;
    s << "t,bank_fraction\n" << std::setprecision(17);
    for (const auto& [t, v] : bank_depletion_curve(report).series) s << t << ',' << v << '\n';
    a.out.write("_bank.csv", s.str());
  }
  json params = to_json(p, n);
  params.update({{"graph", g.description()},
                 {"seed", a.seed},
                 {"burn_in", cfg.burn_in},
                 {"samples", cfg.samples},
                 {"thin", cfg.thinning},
                 {"replicas", a.replicas},
                 {"threads", threads},
                 {"initial", a.initial_state ? "file:" + *a.initial_state : std::string(to_string(cfg.policy))},
                 {"drift_batches", cfg.drift_batches},
                 {"trace_points", cfg.trace_points},
                 {"rng", report.rng_algorithm}});
  write_manifest(a.out, "simulate", args, params, seconds_since(t0));
  out << "simulate: " << report.total_steps * report.replicas << " steps, " << report.histogram.total()
      << " histogram counts";
  if (tv_exact) out << ", tv_to_exact=" << *tv_exact;
  out << "\n";
  return kOk;
}

struct ExactArgs {
  std::string model;
  std::size_t n = 0;
  Balance money = 0;
  Balance limit = 0;
  std::string mode = "exact";
  bool log_column = false;
  bool json = false;
  Output out;
};

int cmd_exact(ExactArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const ModelKind kind = parse_model_kind(a.model);
  const PmfMode mode = parse_pmf_mode(a.mode);
  const ExactPMF pmf = marginal(kind, a.n, a.money, a.limit, mode);
  std::ostringstream csv;
  write_pmf_csv(csv, pmf, a.log_column);
  a.out.write("_pmf.csv", csv.str());
  if (a.json) a.out.write("_pmf.json", to_json(pmf).dump(2));
  json params = to_json(ModelParams{kind, a.money, a.limit}, a.n);
  params["mode"] = std::string(to_string(mode));
  params["log_column"] = a.log_column;
  write_manifest(a.out, "exact", args, params, seconds_since(t0));
  out << "exact: " << pmf.size() << " rows over [" << pmf.window.lo << ", " << pmf.window.hi << "]\n";
  return kOk;
}

struct DensityArgs {
  std::string law;
  double t = 0;
  std::optional<double> limit;
  std::optional<double> rho;
  std::string grid;
  Output out;
};

int cmd_density(DensityArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid grid = parse_grid(a.grid);
  const std::vector<double> cs = grid.points();
  std::vector<double> density(cs.size());
  json params = {{"law", a.law}, {"T", a.t}, {"grid", a.grid}};
  if (a.law == "shifted-exp") {
    if (!a.limit) raise(ErrorCode::invalid_parameter, "shifted-exp needs --limit");
    for (std::size_t i = 0; i < cs.size(); ++i) density[i] = shifted_exp_density(cs[i], a.t, *a.limit);
    params["limit"] = *a.limit;
  } else {
    if (!a.rho) raise(ErrorCode::invalid_parameter, "laplace needs --rho");
    const LaplaceParams lp = laplace_params(a.t, *a.rho);
    for (std::size_t i = 0; i < cs.size(); ++i) density[i] = laplace_density(cs[i], lp);
    params["rho"] = *a.rho;
    params["laplace"] = to_json(lp);
  }
  std::ostringstream csv;
  write_density_csv(csv, cs, density);
  a.out.write("_density.csv", csv.str());
  write_manifest(a.out, "density", args, params, seconds_since(t0));
  out << "density: " << cs.size() << " points\n";
  return kOk;
}

struct VerifyArgs {
  std::size_t max_n = 4;
  Balance max_money = 5;
  Balance max_limit = 3;
  std::vector<std::string> graphs{"path", "cycle", "complete", "star"};
  std::vector<std::string> models{"individual", "collective"};
  bool counts_only = false;
  std::optional<unsigned> threads;
  Output out;
};

int cmd_verify(VerifyArgs& a, const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               const Hooks& hooks) {
  const auto t0 = std::chrono::steady_clock::now();
  if (a.max_n < 1) raise(ErrorCode::invalid_parameter, "--grid-max-n must be at least 1");
  GridSpec spec;
  spec.max_n = a.max_n;
  spec.max_money = a.max_money;
  spec.max_limit = a.max_limit;
  spec.graphs.clear();
  for (const auto& name : a.graphs) spec.graphs.push_back(parse_named_graph(name));
  spec.models.clear();
  for (const auto& name : a.models) spec.models.push_back(parse_model_kind(name));
  VerifyOptions opt;
  if (hooks.lambda) opt.lambda = *hooks.lambda;
  const unsigned threads = resolve_threads(a.threads);

  std::vector<CountCheck> counts;
  for (const auto& c : count_grid(a.max_n, a.max_money, a.max_limit, opt.lambda))
    if (std::find(spec.models.begin(), spec.models.end(), c.kind) != spec.models.end()) counts.push_back(c);
  GridReport grid;
  if (!a.counts_only) grid = verify_grid(spec, opt, threads);

  const json report = to_json(grid, counts);
  a.out.write("_report.json", report.dump(2));
  json params = {{"grid_max_n", a.max_n},       {"grid_max_money", a.max_money}, {"grid_max_limit", a.max_limit},
                 {"graphs", a.graphs},          {"models", a.models},            {"counts_only", a.counts_only},
                 {"threads", threads}};
  write_manifest(a.out, "verify", args, params, seconds_since(t0));

  std::size_t failures = 0;
  for (const auto& c : counts) {
    if (c.match()) continue;
    ++failures;
    err << "FAIL count " << to_string(c.kind) << " N=" << c.agents << " M=" << c.money << " L=" << c.limit
        << ": enumerated " << c.enumerated << ", formula " << c.formula.get_str() << "\n";
  }
  for (const auto& r : grid.instances) {
    if (r.passed()) continue;
    ++failures;
    err << "FAIL " << r.failure << " " << to_string(r.params.kind) << " " << r.graph << " M=" << r.params.money
        << " L=" << r.params.limit << "\n";
  }
  out << "verify: " << counts.size() << " count checks, " << grid.instances.size() << " instances, " << failures
      << " failures\n";
  return failures == 0 ? kOk : kVerification;
}

struct FitArgs {
  std::string pmf;
  double t = 0;
  double rho = 0;
  std::optional<std::string> window;
  double threshold = 1e-4;
  Output out;
};

FitWindow parse_window(const std::string& text) {
  std::istringstream in(text);
  FitWindow w;
  char colon = 0;
  if (!(in >> w.lo >> colon >> w.hi) || colon != ':' || !(in >> std::ws).eof() || w.lo > w.hi)
    raise(ErrorCode::parse_error, "window must look like lo:hi with lo <= hi, got '" + text + "'");
  return w;
}

int cmd_fit(FitArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  std::ifstream in(a.pmf);
  if (!in) raise(ErrorCode::parse_error, "cannot open pmf file " + a.pmf);
  const DensePmf pmf = read_pmf_csv(in);
  const LaplaceParams lp = laplace_params(a.t, a.rho);
  const FitWindow w = a.window ? parse_window(*a.window) : default_fit_window(pmf, lp.K, a.threshold);
  const LaplaceFit fit = fit_laplace_slopes(pmf, w);
  const double tv = tv_distance(pmf, discretized_laplace(lp, pmf.lo, pmf.hi()));
  const auto rel = [](double hat, double ref) { return std::abs(hat - ref) / ref; };
  const MomentResiduals res = moment_residuals(lp);
  const json report = {
      {"a_hat", fit.a_hat},
      {"b_hat", fit.b_hat},
      {"K_hat", fit.K_hat},
      {"predicted", to_json(lp)},
      {"rel_error", {{"a", rel(fit.a_hat, lp.a)}, {"b", rel(fit.b_hat, lp.b)}, {"K", rel(fit.K_hat, lp.K)}}},
      {"tv_to_laplace", tv},
      {"window", {{"lo", fit.window.lo}, {"hi", fit.window.hi}}},
      {"points", {{"left", fit.points_left}, {"right", fit.points_right}}},
      {"moment_residuals", {{"r1", res.r1}, {"r2", res.r2}}},
  };
  a.out.write("_fit.json", report.dump(2));
  json params = {{"pmf", a.pmf}, {"T", a.t}, {"rho", a.rho}, {"threshold", a.threshold}};
  if (a.window) params["window"] = *a.window;
  write_manifest(a.out, "fit", args, params, seconds_since(t0));
  out << "fit: a_hat=" << fit.a_hat << " b_hat=" << fit.b_hat << " tv=" << tv << "\n";
  return kOk;
}

struct ReplayArgs {
  std::string manifest;
  std::optional<std::string> out_dir;
};

std::vector<std::string> replay_args(const ReplayArgs& a) {
  std::ifstream in(a.manifest);
  if (!in) raise(ErrorCode::parse_error, "cannot open manifest " + a.manifest);
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    raise(ErrorCode::parse_error, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!m.contains("args") || !m["args"].is_array()) raise(ErrorCode::parse_error, "manifest has no args array");
  std::vector<std::string> args;
  for (const auto& v : m["args"]) {
    if (!v.is_string()) raise(ErrorCode::parse_error, "manifest args must be strings");
    args.push_back(v.get<std::string>());
  }
  if (args.empty() || args.front() == "replay") raise(ErrorCode::parse_error, "manifest does not describe a replayable run");
  if (a.out_dir) {
    bool replaced = false;
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--out-dir") {
        args[i + 1] = *a.out_dir;
        replaced = true;
      }
    for (auto& s : args)
      if (s.rfind("--out-dir=", 0) == 0) {
        s = "--out-dir=" + *a.out_dir;
        replaced = true;
      }
    if (!replaced) {
      args.push_back("--out-dir");
      args.push_back(*a.out_dir);
    }
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Hooks& hooks) {
  CLI::App app{"Money-exchange models with individual or collective debt limits"};
  app.name("coinflow");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  const std::vector<std::string> models{"individual", "collective"};

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run the Markov chain and write a histogram with diagnostics");
  s->add_option("--model", sim.model, "individual or collective")->required()->check(CLI::IsMember(models));
  s->add_option("--graph", sim.graph, "named:<kind>:<n> or file:<path>")->required();
  s->add_option("--money", sim.money, "Total coins M")->required();
  s->add_option("--limit", sim.limit, "Debt limit L_i or bank stock L_c")->required();
  s->add_option("--seed", sim.seed, "Base seed")->required();
  s->add_option("--burn-in", sim.burn_in, "Steps before sampling (default 20*2|E|*(T+L))");
  s->add_option("--samples", sim.samples, "Number of histogram snapshots")->required();
  s->add_option("--thin", sim.thin, "Steps between snapshots")->capture_default_str();
  s->add_option("--replicas", sim.replicas, "Independent replicas merged into one report")->capture_default_str();
  s->add_option("--threads", sim.threads, "Worker threads (default COINFLOW_THREADS or all cores)");
  s->add_option("--initial", sim.initial, "even or all_on_one")->capture_default_str();
  s->add_option("--initial-state", sim.initial_state, "Snapshot file with the starting configuration");
  s->add_option("--batches", sim.batches, "Batch count for drift intervals")->capture_default_str();
  s->add_option("--trace-points", sim.trace_points, "Bank trace resolution")->capture_default_str();
  s->add_flag("--skip-exact-tv", sim.skip_exact_tv, "Do not compute the distance to the exact marginal");
  add_output_options(s, sim.out, "simulate");

  ExactArgs ex;
  auto* e = app.add_subcommand("exact", "Write the exact single-agent stationary marginal");
  e->add_option("--model", ex.model)->required()->check(CLI::IsMember(models));
  e->add_option("--n", ex.n, "Number of agents")->required();
  e->add_option("--money", ex.money)->required();
  e->add_option("--limit", ex.limit)->required();
  e->add_option("--mode", ex.mode, "exact or log")->capture_default_str()->check(CLI::IsMember({"exact", "log"}));
  e->add_flag("--log-column", ex.log_column, "Write log probabilities");
  e->add_flag("--json", ex.json, "Also write a JSON copy with parameters and mode");
  add_output_options(e, ex.out, "exact");

  DensityArgs de;
  auto* d = app.add_subcommand("density", "Evaluate a limiting density on a grid");
  d->add_option("--law", de.law)->required()->check(CLI::IsMember({"shifted-exp", "laplace"}));
  d->add_option("--t", de.t, "Money temperature M/N")->required();
  d->add_option("--limit", de.limit, "Individual debt limit (shifted-exp)");
  d->add_option("--rho", de.rho, "L_c/M (laplace)");
  d->add_option("--grid", de.grid, "lo:hi:step")->required();
  add_output_options(d, de.out, "density");

  VerifyArgs ve;
  auto* v = app.add_subcommand("verify", "Brute-force verification over a grid of small instances");
  v->add_option("--grid-max-n", ve.max_n)->capture_default_str();
  v->add_option("--grid-max-money", ve.max_money)->capture_default_str();
  v->add_option("--grid-max-limit", ve.max_limit)->capture_default_str();
  v->add_option("--graphs", ve.graphs)->delimiter(',')->capture_default_str();
  v->add_option("--models", ve.models)->delimiter(',')->capture_default_str();
  v->add_flag("--counts-only", ve.counts_only, "Only compare state counts with the formulas");
  v->add_option("--threads", ve.threads);
  add_output_options(v, ve.out, "verify");

  FitArgs fi;
  auto* f = app.add_subcommand("fit", "Fit log-linear slopes to a pmf and compare with the Laplace law");
  f->add_option("--pmf", fi.pmf, "CSV with c,prob or c,log_prob")->required();
  f->add_option("--t", fi.t)->required();
  f->add_option("--rho", fi.rho)->required();
  f->add_option("--window", fi.window, "lo:hi (default: mass above threshold*K)");
  f->add_option("--threshold", fi.threshold)->capture_default_str();
  add_output_options(f, fi.out, "fit");

  ReplayArgs re;
  auto* r = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  r->add_option("--manifest", re.manifest)->required();
  r->add_option("--out-dir", re.out_dir, "Override the recorded output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& ex_) {
    err << "usage error: " << ex_.what() << "\n";
    return kUsage;
  }

  try {
    if (s->parsed()) return cmd_simulate(sim, args, out);
    if (e->parsed()) return cmd_exact(ex, args, out);
    if (d->parsed()) return cmd_density(de, args, out);
    if (v->parsed()) return cmd_verify(ve, args, out, err, hooks);
    if (f->parsed()) return cmd_fit(fi, args, out);
    if (r->parsed()) return run(replay_args(re), out, err, hooks);
  } catch (const Error& ex_) {
    err << "error: " << ex_.what() << "\n";
    return exit_code(ex_.code());
  } catch (const fs::filesystem_error& ex_) {
    err << "error: " << ex_.what() << "\n";
    return kFailure;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kCapacity;
  }
  return kUsage;
}

}  // namespace coinflow::cli
