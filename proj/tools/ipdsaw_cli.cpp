// Command-line front end: partition functions, entropy curves, free
// energies, critical points, transition order, phase scans, sampling and
// rendering, plus a self-test. Data files are written atomically and each
// one gets a sibling <file>.manifest.json from which the run can be replayed.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ipdsaw/config.hpp"
#include "ipdsaw/entropy.hpp"
#include "ipdsaw/errors.hpp"
#include "ipdsaw/free_energy.hpp"
#include "ipdsaw/io.hpp"
#include "ipdsaw/lattice.hpp"
#include "ipdsaw/sampler.hpp"
#include "ipdsaw/walk.hpp"

#ifndef IPDSAW_DEFAULT_CONFIG
#define IPDSAW_DEFAULT_CONFIG ""
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ipdsaw;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit : int { kOk = 0, kValidation = 1, kUsage = 2, kBudget = 64 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// State shared by every subcommand of one invocation.
struct Run {
  std::vector<std::string> argv;
  std::string command;
  Tolerances tol;
  std::string config_path;
  unsigned jobs = 1;
  std::optional<fs::path> cache_dir;
  json manifest = json::object();
  std::vector<std::string> checkpoints;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

template <class T>
std::vector<T> parallel_map(std::size_t count, unsigned jobs, const std::function<T(std::size_t)>& f) {
  std::vector<T> out(count);
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::vector<double> beta_grid(double lo, double hi, int steps) {
  if (steps < 1) throw UsageError("--steps must be at least 1");
  std::vector<double> grid;
  for (int i = 0; i <= steps; ++i) grid.push_back(steps == 0 ? lo : lo + (hi - lo) * i / steps);
  return grid;
}

ReturnProfile cached_profile(Run& run, double beta, int n_max, int k_max) {
  const auto law = GeometricLaw::make(beta);
  if (!run.cache_dir) return build_return_profile(law, n_max, k_max, run.tol.cell_budget);
  const auto path = *run.cache_dir / ("profile_beta" + format_double(beta) + "_n" + std::to_string(n_max) + "_k" +
                                      std::to_string(k_max) + ".bin");
  if (fs::exists(path)) {
    auto p = load_return_profile(path);
    if (p.beta() == beta && p.max_steps() == n_max && p.max_area() == k_max) {
      run.checkpoints.push_back(path.string());
      return p;
    }
  }
  fs::create_directories(*run.cache_dir);
  auto p = build_return_profile(law, n_max, k_max, run.tol.cell_budget);
  save_return_profile(p, path);
  run.checkpoints.push_back(path.string());
  return p;
}

ConcaveEntropy entropy_for(Run& run, const std::string& kind, double beta, int n_max, int area_factor) {
  if (kind == "spectral") return SpectralEntropy(beta).curve(32.0);
  if (kind == "finite") return build_entropy_curve(cached_profile(run, beta, n_max, area_factor * n_max)).majorant;
  throw UsageError("--entropy must be 'finite' or 'spectral'");
}

/// Writes a data file plus its manifest, or prints to stdout when no path.
void emit(Run& run, const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
    return;
  }
  const fs::path path(out);
  write_file_atomic(path, content);
  json m = run.manifest;
  m["command"] = run.command;
  m["argv"] = run.argv;
  m["artifact_version"] = kVersion;
  m["data_file"] = path.filename().string();
  m["tolerances"] = run.tol;
  m["config"] = run.config_path;
  m["jobs"] = run.jobs;
  m["checkpoints"] = run.checkpoints;
  m["wall_clock_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - run.start).count();
  write_file_atomic(path.string() + ".manifest.json", m.dump(2) + "\n");
}

std::vector<ModelKind> models_from(const std::string& s) {
  if (s == "both") return {ModelKind::uniform, ModelKind::non_uniform};
  return {parse_model(s)};
}

// ---------------------------------------------------------------------------

int cmd_partition(Run& run, int length, double beta, const std::string& model_name, int cutoff) {
  const ModelKind m = parse_model(model_name);
  run.manifest["model"] = model_name;
  run.manifest["L"] = length;
  run.manifest["beta"] = beta;
  const double rep = partition_representation(length, beta, m, run.tol.cell_budget);
  std::cout << "model " << to_string(m) << "\nL " << length << "\nbeta " << format_double(beta) << "\n";
  std::cout << "log_Z_representation " << format_double(rep) << "\n";
  if (length > cutoff) {
    std::cout << "log_Z_bruteforce skipped (L above cutoff " << cutoff << ")\n";
    return kOk;
  }
  const double bf = partition_bruteforce(length, beta, m, cutoff);
  const double gap = std::abs(rep - bf) / std::max(1.0, std::abs(bf));
  const bool ok = gap <= run.tol.identity;
  std::cout << "log_Z_bruteforce " << format_double(bf) << "\nrelative_gap " << format_double(gap) << "\nagreement "
            << (ok ? "pass" : "FAIL") << "\n";
  return ok ? kOk : kValidation;
}

int cmd_gcurve(Run& run, double beta, int n_max, int k_max, int grid_den, const std::string& out) {
  run.manifest["beta"] = beta;
  run.manifest["N_max"] = n_max;
  run.manifest["K_max"] = k_max;
  const auto curve = build_entropy_curve(cached_profile(run, beta, n_max, k_max), grid_den);
  run.manifest["alpha_grid_den"] = curve.grid_den;
  emit(run, out, entropy_csv(curve));
  return kOk;
}

int cmd_free_energy(Run& run, const std::string& model_name, const std::vector<double>& betas,
                    const std::vector<int>& lengths, const std::string& entropy, int n_max, int area_factor,
                    const std::string& out) {
  const auto models = models_from(model_name);
  run.manifest["models"] = model_name;
  run.manifest["beta_grid"] = betas;
  run.manifest["L_list"] = lengths;
  run.manifest["entropy"] = entropy;
  run.manifest["N_max"] = n_max;
  run.manifest["area_factor"] = area_factor;
  FreeEnergyOptions opts{run.tol.alpha_grid, run.tol.floor};
  std::string csv(kFreeEnergyCsvHeader);
  csv += '\n';
  // Entropy curves depend on beta only; compute them once per beta.
  const auto curves = parallel_map<ConcaveEntropy>(
      betas.size(), run.jobs, [&](std::size_t i) { return entropy_for(run, entropy, betas[i], n_max, area_factor); });
  for (ModelKind m : models)
    for (std::size_t i = 0; i < betas.size(); ++i) {
      for (int L : lengths) csv += free_energy_csv_row(finite_size_free_energy(L, betas[i], m, run.tol.cell_budget));
      csv += free_energy_csv_row(excess_free_energy(betas[i], m, curves[i], opts));
    }
  emit(run, out, csv);
  return kOk;
}

int cmd_critical_point(Run& run, const std::string& model_name) {
  run.manifest["models"] = model_name;
  bool ok = true;
  for (ModelKind m : models_from(model_name)) {
    const auto cp = critical_point(m);
    const double cubic = critical_point_cubic(m);
    const double diff = std::abs(cp.beta_c - cubic);
    const bool agree = diff <= run.tol.route_agreement && cp.residual < run.tol.critical_residual;
    ok = ok && agree;
    std::cout << "model " << to_string(m) << "\nbeta_c " << format_double(cp.beta_c) << "\nresidual "
              << format_double(cp.residual) << "\nbeta_c_cubic " << format_double(cubic) << "\nroute_difference "
              << format_double(diff) << "\nagreement " << (agree ? "pass" : "FAIL") << "\n";
  }
  return ok ? kOk : kValidation;
}

int cmd_order(Run& run, const std::string& model_name, std::vector<double> eps, const std::string& entropy,
              std::vector<int> n_max_list, int area_factor, const std::string& out) {
  if (eps.empty()) eps = run.tol.order_eps;
  if (n_max_list.empty()) n_max_list = run.tol.order_n_max;
  run.manifest["models"] = model_name;
  run.manifest["eps_grid"] = eps;
  run.manifest["entropy"] = entropy;
  run.manifest["N_max_list"] = n_max_list;
  run.manifest["area_factor"] = area_factor;
  FreeEnergyOptions opts{run.tol.alpha_grid, run.tol.floor};
  json report = json::array();
  bool ok = true;
  for (ModelKind m : models_from(model_name)) {
    json entry{{"model", std::string(to_string(m))}, {"fits", json::array()}};
    const std::vector<int> sizes = entropy == "spectral" ? std::vector<int>{0} : n_max_list;
    double prev_dev = INFINITY;
    bool drift_ok = true;
    double last_slope = 0.0;
    for (int n : sizes) {
      const EntropyFactory factory = [&, n](double beta) { return entropy_for(run, entropy, beta, n, area_factor); };
      const auto fit = transition_order_fit(m, eps, factory, opts);
      const double dev = std::abs(fit.slope - 1.5);
      drift_ok = drift_ok && dev <= prev_dev;
      prev_dev = dev;
      last_slope = fit.slope;
      json f{{"slope", fit.slope}, {"beta_c", fit.beta_c}, {"eps", fit.eps}, {"f_excess", fit.f_excess},
             {"x_star", fit.x_star}};
      if (n > 0) f["N_max"] = n;
      entry["fits"].push_back(f);
      std::cerr << to_string(m) << (n > 0 ? " N_max=" + std::to_string(n) : std::string(" spectral")) << " slope "
                << format_double(fit.slope) << "\n";
    }
    entry["slope"] = last_slope;
    entry["in_bracket"] = run.tol.order_slope.contains(last_slope);
    entry["drift_toward_three_halves"] = drift_ok;
    ok = ok && run.tol.order_slope.contains(last_slope) && drift_ok;
    report.push_back(entry);
  }
  emit(run, out, report.dump(2) + "\n");
  return ok ? kOk : kValidation;
}

int cmd_sample(Run& run, int length, double beta, const std::string& model_name, std::uint64_t seed,
               std::size_t count, bool with_stretches, const std::string& out) {
  const ModelKind m = parse_model(model_name);
  run.manifest["model"] = model_name;
  run.manifest["L"] = length;
  run.manifest["beta"] = beta;
  run.manifest["seed"] = seed;
  run.manifest["count"] = count;
  run.manifest["rng"] = std::string(kRngName);
  const PathSampler sampler(length, beta, m, run.tol.cell_budget);
  const auto samples = sampler.sample_many(seed, count, run.jobs);
  std::string lines;
  for (const auto& s : samples) {
    json j{{"model", std::string(to_string(s.model))}, {"beta", s.beta},       {"L", s.length},    {"N", s.extension},
           {"touches", s.touches},        {"vspan", s.vspan},     {"seed", s.seed},   {"index", s.index}};
    if (with_stretches) j["stretches"] = s.stretches.stretches();
    lines += j.dump() + "\n";
  }
  emit(run, out, lines);
  return kOk;
}

int cmd_render(Run& run, const std::string& in, const std::string& out_dir, long index) {
  run.manifest["input"] = in;
  std::ifstream f(in);
  if (!f) throw UsageError("cannot read " + in);
  std::string line;
  long i = 0;
  int written = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (index >= 0 && i++ != index) continue;
    const auto j = json::parse(line);
    if (!j.contains("stretches")) throw UsageError("sample records lack stretches; re-run sample with --with-stretches");
    const StretchConfig cfg(j["stretches"].get<std::vector<int>>(), j["L"].get<int>());
    std::ostringstream title;
    title << j["model"].get<std::string>() << " beta=" << format_double(j["beta"].get<double>())
          << " L=" << cfg.length() << " N=" << cfg.size() << " touches=" << hamiltonian(cfg);
    const auto name = "sample_" + std::to_string(j["seed"].get<std::uint64_t>()) + "_" +
                      std::to_string(j["index"].get<std::uint64_t>()) + ".svg";
    emit(run, (fs::path(out_dir) / name).string(), render_svg(stretches_to_path(cfg), {}, title.str()));
    ++written;
  }
  std::cout << "rendered " << written << " path(s) into " << out_dir << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_selftest(Run& run) {
  json checks = json::array();
  int failed = 0;
  auto check = [&](const std::string& name, const std::function<bool()>& f) {
    bool pass = false;
    std::string error;
    try {
      pass = f();
    } catch (const std::exception& e) {
      error = e.what();
    }
    json c{{"name", name}, {"pass", pass}};
    if (!error.empty()) c["error"] = error;
    checks.push_back(c);
    if (!pass) ++failed;
  };
  const auto& tol = run.tol;

  check("wedge_identity", [] {
    for (int x = -50; x <= 50; ++x)
      for (int y = -50; y <= 50; ++y)
        if (wedge(x, y) != (x * y < 0 ? std::min(std::abs(x), std::abs(y)) : 0)) return false;
    return true;
  });
  check("count_paths_recurrence", [] {
    for (int L = 3; L <= 60; ++L)
      if (count_paths(L).count != 2 * count_paths(L - 1).count + count_paths(L - 2).count) return false;
    return count_paths(1).count == 1 && count_paths(2).count == 3;
  });
  check("self_touchings_equal_hamiltonian", [] {
    for (int L = 1; L <= 9; ++L) {
      bool ok = true;
      for_each_stretch_config(L, [&](const std::vector<int>& l) {
        const StretchConfig cfg(l, L);
        ok = ok && count_self_touchings(stretches_to_path(cfg)) == hamiltonian(cfg) &&
             path_to_stretches(stretches_to_path(cfg)) == cfg;
      });
      if (!ok) return false;
    }
    return true;
  });
  check("representation_identity", [&] {
    for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform})
      for (double beta : {0.5, 1.0, 2.0})
        for (int L = 2; L <= 10; ++L) {
          const double bf = partition_bruteforce(L, beta, m);
          if (std::abs(partition_representation(L, beta, m) - bf) > tol.identity * std::max(1.0, std::abs(bf)))
            return false;
        }
    return true;
  });
  check("length_two_partition", [] {
    return std::abs(partition_representation(2, 1.0, ModelKind::uniform)) < 1e-14 &&
           std::abs(partition_representation(2, 1.0, ModelKind::non_uniform) - std::log(4.0 / 9.0)) < 1e-14;
  });
  check("zero_area_return", [] {
    const auto law = GeometricLaw::make(1.0);
    const auto p = build_return_profile(law, 10, 4);
    for (int n = 0; n <= 10; ++n)
      if (std::abs(p.log_return_prob(n, 0) + n * static_cast<double>(law.log_c)) > 1e-12 * (n + 1)) return false;
    return true;
  });
  check("critical_points", [&] {
    const auto nu = critical_point(ModelKind::non_uniform);
    const auto u = critical_point(ModelKind::uniform);
    return std::abs(nu.beta_c - critical_point_cubic(ModelKind::non_uniform)) <= tol.route_agreement &&
           std::abs(nu.beta_c - 1.0) <= tol.beta_c_nu_window && nu.residual < tol.critical_residual &&
           std::abs(u.beta_c - tol.beta_c_u_reference) <= tol.beta_c_u_tolerance && u.residual < tol.critical_residual;
  });
  check("entropy_at_zero", [&] {
    const SpectralEntropy s(1.0);
    return std::abs(g_finite(1.0, 8, Rational(0)) + static_cast<double>(GeometricLaw::make(1.0).log_c)) < tol.g_zero &&
           std::abs(s.value(0.0) + static_cast<double>(GeometricLaw::make(1.0).log_c)) < tol.g_zero;
  });
  check("phase_dichotomy", [&] {
    for (ModelKind m : {ModelKind::uniform, ModelKind::non_uniform}) {
      const double bc = critical_point(m).beta_c;
      const auto above = excess_free_energy(bc + 0.5, m, SpectralEntropy(bc + 0.5).curve(32.0));
      const auto below = excess_free_energy(bc - 0.3, m, SpectralEntropy(bc - 0.3).curve(32.0));
      if (!(above.f_excess <= tol.collapsed_ceiling && below.f_excess >= tol.extended_minimum)) return false;
    }
    return true;
  });
  check("sampler_invariants", [] {
    const PathSampler s(30, 1.0, ModelKind::non_uniform);
    for (std::uint64_t i = 0; i < 200; ++i) {
      const auto p = s.sample(1, i);
      if (p.touches != hamiltonian(p.stretches) || p.stretches.length() != 30) return false;
    }
    return s.sample(1, 5).stretches == s.sample(1, 5).stretches;
  });
  check("growth_constant", [&] {
    const double ratio = std::exp(count_paths(201).log() - count_paths(200).log());
    return std::abs(ratio - (1.0 + std::numbers::sqrt2)) < tol.growth_constant;
  });

  json report{{"checks", checks}, {"passed", static_cast<int>(checks.size()) - failed}, {"failed", failed}};
  std::cout << report.dump(2) << "\n";
  return failed == 0 ? kOk : kValidation;
}

// ---------------------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, int depth = 0) {
  CLI::App app{"Exact computations for interacting partially directed self-avoiding walks"};
  app.set_version_flag("--version", kVersion);
  Run run;
  run.argv = args;
  std::string config_path = IPDSAW_DEFAULT_CONFIG, manifest_path;
  app.add_option("--config", config_path, "Tolerances JSON file");
  app.add_option("--jobs", run.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--manifest", manifest_path, "Replay the run recorded in a manifest")->check(CLI::ExistingFile);
  app.require_subcommand(0, 1);

  int L = 10, cutoff = kDefaultBruteForceCutoff, n_max = 64, k_max = 512, grid_den = 0, area_factor = 8, steps = 28;
  double beta = 1.0, beta_min = 0.2, beta_max = 3.0;
  std::string model = "nu", out, entropy = "finite", in, out_dir = ".";
  std::vector<double> betas, eps;
  std::vector<int> lengths, n_max_list;
  std::uint64_t seed = 0;
  std::size_t count = 1000;
  bool with_stretches = false;
  long index = -1;

  auto* partition = app.add_subcommand("partition", "log Z by the representation and by brute force");
  partition->add_option("--L", L, "Path length")->required()->check(CLI::PositiveNumber);
  partition->add_option("--beta", beta, "Coupling")->required();
  partition->add_option("--model", model, "u or nu");
  partition->add_option("--cutoff", cutoff, "Largest L for brute force");

  auto* gcurve = app.add_subcommand("gcurve", "Entropy curve CSV");
  gcurve->add_option("--beta", beta, "Coupling")->required();
  gcurve->add_option("--n-max", n_max, "Largest step count");
  gcurve->add_option("--k-max", k_max, "Largest area");
  gcurve->add_option("--grid-den", grid_den, "Alpha grid denominator (default N_max)");
  gcurve->add_option("--out", out, "Output CSV (stdout if omitted)");

  auto* free_energy = app.add_subcommand("free-energy", "Variational and finite-size free energies CSV");
  free_energy->add_option("--model", model, "u, nu or both");
  free_energy->add_option("--beta", betas, "Coupling values")->required();
  free_energy->add_option("--L", lengths, "Finite-size lengths to include");
  free_energy->add_option("--entropy", entropy, "finite or spectral");
  free_energy->add_option("--n-max", n_max, "Step count for the finite-N entropy");
  free_energy->add_option("--area-factor", area_factor, "K_max = area_factor * N_max");
  free_energy->add_option("--out", out, "Output CSV");

  auto* critical = app.add_subcommand("critical-point", "Critical couplings by both routes");
  critical->add_option("--model", model, "u, nu or both");

  auto* order = app.add_subcommand("order", "Transition-order fit and its drift in N_max");
  order->add_option("--model", model, "u, nu or both");
  order->add_option("--eps", eps, "Distances below beta_c");
  order->add_option("--entropy", entropy, "finite or spectral");
  order->add_option("--n-max", n_max_list, "Sequence of N_max values");
  order->add_option("--area-factor", area_factor, "K_max = area_factor * N_max");
  order->add_option("--out", out, "Output JSON");

  auto* scan = app.add_subcommand("scan", "Phase diagram: excess free energy and phase on a beta grid");
  scan->add_option("--model", model, "u, nu or both");
  scan->add_option("--beta-min", beta_min, "Smallest coupling");
  scan->add_option("--beta-max", beta_max, "Largest coupling");
  scan->add_option("--steps", steps, "Grid intervals");
  scan->add_option("--entropy", entropy, "finite or spectral");
  scan->add_option("--n-max", n_max, "Step count for the finite-N entropy");
  scan->add_option("--area-factor", area_factor, "K_max = area_factor * N_max");
  scan->add_option("--out", out, "Output CSV");

  auto* sample = app.add_subcommand("sample", "Exact Boltzmann samples as JSON lines");
  sample->add_option("--L", L, "Path length")->required()->check(CLI::PositiveNumber);
  sample->add_option("--beta", beta, "Coupling")->required();
  sample->add_option("--model", model, "u or nu");
  sample->add_option("--seed", seed, "RNG seed")->required();
  sample->add_option("--count", count, "Number of samples");
  sample->add_flag("--with-stretches", with_stretches, "Include full stretch vectors");
  sample->add_option("--out", out, "Output JSONL");

  auto* render = app.add_subcommand("render", "SVG drawings of sampled paths");
  render->add_option("--in", in, "Sample JSONL with stretches")->required();
  render->add_option("--out-dir", out_dir, "Output directory");
  render->add_option("--index", index, "Render only this record");

  auto* selftest = app.add_subcommand("selftest", "Invariant suite with a machine-readable report");

  std::vector<const char*> cargv;
  for (const auto& a : args) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  if (!manifest_path.empty()) {
    if (depth > 0) throw UsageError("a manifest cannot reference another manifest");
    if (app.get_subcommands().size() > 0) throw UsageError("--manifest replaces the subcommand");
    std::ifstream f(manifest_path);
    const auto m = json::parse(f);
    return run_cli(m.at("argv").get<std::vector<std::string>>(), depth + 1);
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kUsage;
  }

  run.config_path = config_path;
  if (!config_path.empty()) run.tol = load_tolerances(config_path);
  if (const char* cache = std::getenv("IPDSAW_CACHE_DIR"); cache && *cache) run.cache_dir = fs::path(cache);
  run.command = app.get_subcommands().front()->get_name();

  if (partition->parsed()) return cmd_partition(run, L, beta, model, cutoff);
  if (gcurve->parsed()) return cmd_gcurve(run, beta, n_max, k_max, grid_den, out);
  if (free_energy->parsed()) return cmd_free_energy(run, model, betas, lengths, entropy, n_max, area_factor, out);
  if (critical->parsed()) return cmd_critical_point(run, model);
  if (order->parsed()) return cmd_order(run, model, eps, entropy, n_max_list, area_factor, out);
  if (scan->parsed()) {
    run.manifest["scan"] = {{"beta_min", beta_min}, {"beta_max", beta_max}, {"steps", steps}};
    return cmd_free_energy(run, model, beta_grid(beta_min, beta_max, steps), {}, entropy, n_max, area_factor, out);
  }
  if (sample->parsed()) return cmd_sample(run, L, beta, model, seed, count, with_stretches, out);
  if (render->parsed()) return cmd_render(run, in, out_dir, index);
  if (selftest->parsed()) return cmd_selftest(run);
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(std::vector<std::string>(argv, argv + argc));
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget refusal: " << e.what() << "\n";
    return kBudget;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const NotConverged& e) {
    std::cerr << "not converged: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
}
