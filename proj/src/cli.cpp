#include "graphnls/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphnls/competitors.hpp"
#include "graphnls/thresholds.hpp"

namespace graphnls {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<double> ParamRange::values() const {
  if (!(step > 0.0) || hi < lo)
    throw ConfigError("range must satisfy lo <= hi with step > 0");
  std::vector<double> out;
  for (double v = lo; v <= hi + 0.5 * step; v += step) out.push_back(v);
  if (out.empty()) throw ConfigError("empty parameter range");
  return out;
}

void JobConfig::validate() const {
  static const std::vector<std::string> commands{
      "check", "solve", "gn", "threshold", "sweep", "competitor"};
  if (std::find(commands.begin(), commands.end(), command) == commands.end())
    throw ConfigError("unknown command: " + command);
  if (spec.empty()) throw ConfigError("spec must not be empty");
  if (bc != "dirichlet" && bc != "neumann")
    throw ConfigError("bc must be 'dirichlet' or 'neumann'");
  if (h && !(*h > 0.0)) throw ConfigError("h must be positive");
  if (n && *n < 0) throw ConfigError("n must be nonnegative");
  if (mu && !(*mu > 0.0)) throw ConfigError("mu must be positive");
  if (tol && !(*tol > 0.0)) throw ConfigError("tol must be positive");
  if (mu_range) mu_range->values();
  if (alpha_range) alpha_range->values();
  if (command == "competitor" && kind != "tent" && kind != "edge_soliton" &&
      kind != "soliton")
    throw ConfigError("competitor kind must be tent, edge_soliton or soliton");
  if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
}

int max_threads() {
  if (const char* env = std::getenv("GRAPHNLS_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

constexpr int kSchemaVersion = 1;

std::string timestamp_now() {
  auto t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

json report_skeleton(const JobConfig& job) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = job.command;
  j["spec"] = job.spec;
  j["seed"] = job.seed;
  // everything volatile lives in the meta block so reports stay
  // byte-identical across reruns once meta is excluded
  j["meta"] = {{"timestamp", timestamp_now()}};
  return j;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void write_function_csv(const fs::path& path, const GraphFunction& u) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << "# graphnls function csv v1\n";
  f << "edge,spec_edge,cell_x,cell_y,s,value\n";
  const auto& graph = u.mesh->graph();
  for (const auto& em : u.mesh->edge_meshes()) {
    const auto& e = graph.edges[em.graph_edge];
    for (size_t k = 0; k < em.nodes.size(); ++k)
      f << em.graph_edge << ',' << e.spec_edge << ',' << e.cell[0] << ','
        << e.cell[1] << ',' << em.h * double(k) << ','
        << u.values[em.nodes[k]] << '\n';
  }
}

// minimal static profile: values against cumulative arclength
void write_svg(const fs::path& path, const GraphFunction& u) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  double total = 0.0;
  for (const auto& em : u.mesh->edge_meshes())
    total += em.h * double(em.nodes.size() - 1);
  double vmax = std::max(1e-12, u.values.cwiseAbs().maxCoeff());
  const double W = 800.0, H = 300.0, pad = 10.0;
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
    << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  double offset = 0.0;
  for (const auto& em : u.mesh->edge_meshes()) {
    f << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" "
         "points=\"";
    for (size_t k = 0; k < em.nodes.size(); ++k) {
      double x = pad + (offset + em.h * double(k)) / total * (W - 2 * pad);
      double y = H - pad - (u.values[em.nodes[k]] / vmax) * (H - 2 * pad);
      f << x << ',' << y << ' ';
    }
    f << "\"/>\n";
    offset += em.h * double(em.nodes.size() - 1);
  }
  f << "</svg>\n";
}

json residual_to_json(const Residual& r) {
  return {{"edge", r.edge}, {"kirchhoff", r.kirchhoff}};
}

json solve_to_json(const SolveResult& res) {
  return {{"classification", to_string(res.classification)},
          {"energy", res.energy},
          {"lambda", res.lambda},
          {"residual", residual_to_json(res.resid)},
          {"iterations", res.iterations},
          {"mass", res.mass},
          {"truncation_radius", res.truncation_radius},
          {"h", res.h},
          {"sup", {{"initial", res.sup.initial},
                   {"final", res.sup.final_value},
                   {"max", res.sup.max_value},
                   {"min", res.sup.min_value}}},
          {"flags", res.flags}};
}

SolveOptions solve_options(const JobConfig& job) {
  SolveOptions opts;
  if (job.h) opts.h_target = *job.h;
  if (job.n) {
    opts.n_max_dim1 = *job.n;
    opts.n_max_dim2 = *job.n;
    opts.n_start = std::min(opts.n_start, std::max(1, *job.n));
  }
  if (job.tol) opts.residual_tol = *job.tol;
  if (job.max_iters) opts.max_iters = *job.max_iters;
  opts.seed = job.seed;
  opts.validate();
  return opts;
}

GNOptions gn_options(const JobConfig& job) {
  GNOptions opts;
  if (job.n) opts.n = *job.n;
  if (job.h) opts.h_target = *job.h;
  opts.seed = job.seed;
  return opts;
}

EnergyParams energy_params(const JobConfig& job, double mu, double alpha) {
  EnergyParams prm{job.p, job.q, alpha, mu};
  prm.validate();
  return prm;
}

int cmd_check(const JobConfig& job, const PeriodicGraphSpec& spec) {
  json j = report_skeleton(job);
  j["terminal"] = has_terminal_point(spec);
  j["tilde_mu"] = tilde_mu(spec);
  j["H"] = spec.dim >= 1 ? assumption_H(spec) : false;
  j["dim"] = spec.dim;
  j["canonical"] = spec.canonical();
  j["cell_length"] = spec.cell_length();
  std::cout << json{{"terminal", j["terminal"]},
                    {"tilde_mu", j["tilde_mu"]},
                    {"H", j["H"]}}
                   .dump()
            << '\n';
  write_json(fs::path(job.out) / "check.json", j);
  return 0;
}

int cmd_solve(const JobConfig& job, const PeriodicGraphSpec& spec) {
  EnergyParams prm =
      energy_params(job, job.mu.value_or(1.0), job.alpha.value_or(0.0));
  auto res = solve_ground_state(spec, prm, solve_options(job));
  json j = report_skeleton(job);
  j["params"] = {{"p", prm.p}, {"q", prm.q}, {"alpha", prm.alpha},
                 {"mu", prm.mu}};
  j["result"] = solve_to_json(res);
  write_json(fs::path(job.out) / "solve.json", j);
  write_function_csv(fs::path(job.out) / "solution.csv", res.u);
  if (job.emit_svg) write_svg(fs::path(job.out) / "solution.svg", res.u);
  std::cout << json{{"classification", to_string(res.classification)},
                    {"energy", res.energy}}
                   .dump()
            << '\n';
  return res.classification == Classification::maxiter ? 4 : 0;
}

int cmd_gn(const JobConfig& job, const PeriodicGraphSpec& spec) {
  auto rep = critical_mass_homogeneous(spec, job.p, gn_options(job));
  json j = report_skeleton(job);
  j["r"] = job.p;
  j["critical_mass"] = rep.mass;
  j["gn"] = {{"kind", rep.gn.kind.name()},
             {"order", rep.gn.kind.order},
             {"estimate", rep.gn.estimate},
             {"n", rep.gn.n},
             {"h", rep.gn.h},
             {"n_delta", rep.gn.n_delta},
             {"h_delta", rep.gn.h_delta},
             {"ascent_iters", rep.gn.ascent_iters},
             {"flags", rep.gn.flags}};
  write_json(fs::path(job.out) / "gn.json", j);
  write_function_csv(fs::path(job.out) / "maximizer.csv", rep.gn.maximizer);
  if (job.emit_svg) write_svg(fs::path(job.out) / "maximizer.svg",
                              rep.gn.maximizer);
  std::cout << json{{"critical_mass", rep.mass},
                    {"estimate", rep.gn.estimate}}
                   .dump()
            << '\n';
  return 0;
}

json probes_to_json(const std::vector<ProbeRecord>& probes) {
  json arr = json::array();
  for (const auto& pr : probes) {
    json p = {{"value", pr.value}, {"f_hat", pr.f_hat}};
    if (pr.regime) p["regime"] = to_string(*pr.regime);
    arr.push_back(p);
  }
  return arr;
}

int cmd_threshold(const JobConfig& job, const PeriodicGraphSpec& spec) {
  ThresholdOptions opts;
  opts.gn = gn_options(job);
  opts.solve = solve_options(job);
  if (job.tol) opts.bracket_rel_tol = *job.tol;

  json j = report_skeleton(job);
  if (job.alpha && *job.alpha > 0.0) {
    auto rep = estimate_mu_crit(spec, job.p, job.q, *job.alpha, opts);
    j["target"] = "mu_crit";
    j["bracket"] = {rep.lo, rep.hi};
    j["mu_bar"] = rep.mu_bar;
    j["mu_p"] = rep.mu_p;
    j["mu_q"] = rep.mu_q;
    j["upper_bound"] = rep.upper_bound;
    j["probes"] = probes_to_json(rep.probes);
    j["flags"] = rep.flags;
    std::cout << json{{"target", "mu_crit"}, {"bracket", {rep.lo, rep.hi}}}
                     .dump()
              << '\n';
  } else {
    if (!job.mu)
      throw ConfigError(
          "threshold needs --alpha > 0 (mu_crit) or --mu (alpha_bar)");
    auto rep = estimate_alpha_bar(spec, job.p, job.q, *job.mu, opts);
    j["target"] = "alpha_bar";
    j["alpha_bar"] = rep.alpha_bar;
    j["bracket"] = {rep.lo, rep.hi};
    j["diagnostic_lower"] = rep.diagnostic_lower;
    j["probes"] = probes_to_json(rep.probes);
    j["flags"] = rep.flags;
    std::cout << json{{"target", "alpha_bar"}, {"alpha_bar", rep.alpha_bar}}
                     .dump()
              << '\n';
  }
  write_json(fs::path(job.out) / "threshold.json", j);
  return 0;
}

int cmd_sweep(const JobConfig& job, const PeriodicGraphSpec& spec) {
  std::vector<double> mus = job.mu_range
                                ? job.mu_range->values()
                                : std::vector<double>{job.mu.value_or(1.0)};
  std::vector<double> alphas =
      job.alpha_range ? job.alpha_range->values()
                      : std::vector<double>{job.alpha.value_or(0.0)};
  struct Task {
    double mu, alpha;
    SolveResult res;
    bool ok = false;
    std::string error;
  };
  std::vector<Task> tasks;
  for (double a : alphas)
    for (double m : mus) tasks.push_back({m, a, {}, false, ""});

  const SolveOptions base = solve_options(job);
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < tasks.size();
         i = next.fetch_add(1)) {
      auto& t = tasks[i];
      try {
        EnergyParams prm = energy_params(job, t.mu, t.alpha);
        SolveOptions opts = base;
        opts.seed = job.seed + i;  // per-task seed
        t.res = solve_ground_state(spec, prm, opts);
        t.ok = true;
      } catch (const std::exception& e) {
        t.error = e.what();
      }
    }
  };
  int nthreads = std::min<int>(max_threads(), int(tasks.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  fs::path csv = fs::path(job.out) / "sweep.csv";
  std::ofstream f(csv);
  if (!f) throw ConfigError("cannot write " + csv.string());
  f << "# graphnls sweep csv v1\n";
  f << "mu,alpha,classification,energy,lambda,resid_edge,resid_kirchhoff,"
       "iterations,n,h,seed,error\n";
  f.precision(12);
  for (size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    if (t.ok)
      f << t.mu << ',' << t.alpha << ',' << to_string(t.res.classification)
        << ',' << t.res.energy << ',' << t.res.lambda << ','
        << t.res.resid.edge << ',' << t.res.resid.kirchhoff << ','
        << t.res.iterations << ',' << t.res.truncation_radius << ','
        << t.res.h << ',' << job.seed + i << ",\n";
    else
      f << t.mu << ',' << t.alpha << ",error,,,,,,,," << job.seed + i << ','
        << t.error << '\n';
  }
  std::cout << json{{"tasks", tasks.size()}, {"csv", csv.string()}}.dump()
            << '\n';
  return 0;
}

int cmd_competitor(const JobConfig& job, const PeriodicGraphSpec& spec) {
  const double mu = job.mu.value_or(1.0);
  EnergyParams prm =
      energy_params(job, mu, job.alpha.value_or(0.0));
  fs::path table_path = fs::path(job.out) / "competitor.csv";
  std::ofstream table(table_path);
  if (!table) throw ConfigError("cannot write " + table_path.string());
  table << "# graphnls competitor csv v1\n";
  table << "kind,parameter,mass,energy\n";
  table.precision(12);

  GraphFunction last;
  if (job.kind == "tent") {
    int n_max = job.n.value_or(8);
    for (int n = 1; n <= n_max; n *= 2) {
      auto tent = tent_competitor(spec, n, mu,
                                  job.h ? *job.h : 0.25);
      table << "tent," << n << ',' << norm_l2sq(tent.u) << ','
            << energy(tent.u, prm) << '\n';
      last = tent.u;
    }
  } else if (job.kind == "edge_soliton") {
    const auto s = spec.dim >= 1 && !spec.canonical()
                       ? rebase(spec, spec.min_separation())
                       : spec;
    auto bc = job.bc == "neumann" ? BoundaryCondition::neumann
                                  : BoundaryCondition::dirichlet;
    auto graph = truncate(s, spec.dim == 0 ? 0 : job.n.value_or(4), bc);
    auto mesh =
        build_mesh(graph, job.h ? *job.h : std::min(0.05, 0.05 / job.lambda));
    int edge = interior_point(graph).first;
    for (double lam : {1.0, 4.0, 16.0, 64.0}) {
      double use = lam * job.lambda;
      auto u = edge_soliton_competitor(mesh, edge, use);
      table << "edge_soliton," << use << ',' << norm_l2sq(u) << ','
            << energy(u, EnergyParams{prm.p, prm.q, prm.alpha, norm_l2sq(u)})
            << '\n';
      last = u;
    }
  } else {  // soliton
    double lam = job.lambda;
    auto sol = soliton_on_line(job.p, lam, 60.0, job.h ? *job.h : 0.005,
                               BoundaryCondition::dirichlet);
    table << "soliton," << lam << ',' << norm_l2sq(sol.u) << ','
          << energy(sol.u, EnergyParams{job.p, job.q, 0.0,
                                        std::max(1e-12, norm_l2sq(sol.u))})
          << '\n';
    last = sol.u;
  }
  write_function_csv(fs::path(job.out) / "competitor_function.csv", last);
  if (job.emit_svg)
    write_svg(fs::path(job.out) / "competitor_function.svg", last);
  std::cout << json{{"kind", job.kind}, {"table", table_path.string()}}.dump()
            << '\n';
  return 0;
}

void emit_error(const std::string& type, const std::string& message) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump()
            << '\n';
}

}  // namespace

int run(const JobConfig& config) {
  try {
    config.validate();
    fs::create_directories(config.out);
    auto spec = load_spec(config.spec);
    if (config.command == "check") return cmd_check(config, spec);
    if (config.command == "solve") return cmd_solve(config, spec);
    if (config.command == "gn") return cmd_gn(config, spec);
    if (config.command == "threshold") return cmd_threshold(config, spec);
    if (config.command == "sweep") return cmd_sweep(config, spec);
    return cmd_competitor(config, spec);
  } catch (const ConfigError& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const SpecError& e) {
    emit_error("spec", e.what());
    return 3;
  } catch (const nlohmann::json::exception& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("config", e.what());
    return 2;
  }
}

void apply_config_json(const json& j, JobConfig& config) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  if (j.contains("command")) config.command = j["command"].get<std::string>();
  if (j.contains("spec")) config.spec = j["spec"].get<std::string>();
  if (j.contains("p")) config.p = j["p"].get<double>();
  if (j.contains("q")) config.q = j["q"].get<double>();
  if (j.contains("alpha")) config.alpha = j["alpha"].get<double>();
  if (j.contains("mu")) config.mu = j["mu"].get<double>();
  if (j.contains("n")) config.n = j["n"].get<int>();
  if (j.contains("h")) config.h = j["h"].get<double>();
  if (j.contains("max_iters")) config.max_iters = j["max_iters"].get<int>();
  if (j.contains("bc")) config.bc = j["bc"].get<std::string>();
  if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out")) config.out = j["out"].get<std::string>();
  if (j.contains("emit_svg")) config.emit_svg = j["emit_svg"].get<bool>();
  if (j.contains("tol")) config.tol = j["tol"].get<double>();
  if (j.contains("kind")) config.kind = j["kind"].get<std::string>();
  if (j.contains("lambda")) config.lambda = j["lambda"].get<double>();
  auto range = [&](const char* key) -> std::optional<ParamRange> {
    if (!j.contains(key)) return std::nullopt;
    auto v = j[key].get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError("ranges need [lo, hi, step]");
    return ParamRange{v[0], v[1], v[2]};
  };
  if (auto r = range("mu_range")) config.mu_range = r;
  if (auto r = range("alpha_range")) config.alpha_range = r;
}

int run_main(int argc, char** argv) {
  CLI::App app{"ground states of NLS energies on periodic metric graphs"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "print usage");

  JobConfig job;
  // config file first; explicit flags override it below
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") {
      std::ifstream f(argv[i + 1]);
      if (!f) {
        emit_error("config", std::string("cannot open config file ") +
                                 argv[i + 1]);
        return 2;
      }
      try {
        apply_config_json(json::parse(f), job);
      } catch (const std::exception& e) {
        emit_error("config", e.what());
        return 2;
      }
    }
  std::vector<double> mu_range_v, alpha_range_v;
  std::string config_path;
  auto add_common = [&](CLI::App* sub) {
    sub->set_help_flag("--help", "print usage");
    sub->add_option("--config", config_path, "JSON config file (flags win)");
    sub->add_option("--spec", job.spec, "builtin spec name or JSON path");
    sub->add_option("--p", job.p, "leading exponent p");
    sub->add_option("--q", job.q, "secondary exponent q");
    sub->add_option("--alpha", [&job](const std::vector<std::string>& v) {
      job.alpha = std::stod(v.back());
      return true;
    }, "coefficient of the q-term");
    sub->add_option("--mu", [&job](const std::vector<std::string>& v) {
      job.mu = std::stod(v.back());
      return true;
    }, "mass constraint");
    sub->add_option("--mu-range", mu_range_v, "mass grid: lo hi step")
        ->expected(3);
    sub->add_option("--alpha-range", alpha_range_v, "alpha grid: lo hi step")
        ->expected(3);
    sub->add_option("--n", [&job](const std::vector<std::string>& v) {
      job.n = std::stoi(v.back());
      return true;
    }, "truncation radius");
    sub->add_option("--h", [&job](const std::vector<std::string>& v) {
      job.h = std::stod(v.back());
      return true;
    }, "target mesh width");
    sub->add_option("--bc", job.bc, "boundary condition: dirichlet|neumann");
    sub->add_option("--seed", job.seed, "base RNG seed");
    sub->add_option("--out", job.out, "output directory");
    sub->add_flag("--emit-svg", job.emit_svg, "also write SVG profiles");
    sub->add_option("--tol", [&job](const std::vector<std::string>& v) {
      job.tol = std::stod(v.back());
      return true;
    }, "residual / bracket tolerance");
  };
  for (const char* name : {"check", "solve", "gn", "threshold", "sweep"})
    add_common(app.add_subcommand(name));
  auto* comp = app.add_subcommand("competitor");
  add_common(comp);
  comp->add_option("--kind", job.kind, "tent | edge_soliton | soliton");
  comp->add_option("--lambda", job.lambda, "soliton frequency scale");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    emit_error("config", e.what());
    return 2;
  }
  job.command = app.get_subcommands().front()->get_name();
  if (mu_range_v.size() == 3)
    job.mu_range = ParamRange{mu_range_v[0], mu_range_v[1], mu_range_v[2]};
  if (alpha_range_v.size() == 3)
    job.alpha_range =
        ParamRange{alpha_range_v[0], alpha_range_v[1], alpha_range_v[2]};
  return run(job);
}

}  // namespace graphnls
