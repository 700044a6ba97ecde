#include "commands.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "config.hpp"
#include "dk/diagnostics.hpp"
#include "dk/errors.hpp"
#include "dk/io.hpp"
#include "dk/parallel.hpp"
#include "dk/particles.hpp"
#include "dk/rng.hpp"
#include "dk/solver.hpp"

namespace dk::cli {

namespace {

using json = nlohmann::ordered_json;

struct Context {
  ExperimentConfig cfg;
  std::filesystem::path out;
  std::uint64_t seed = 0;
  int replicas = 1;
  int threads = 1;
  std::uint64_t hash = 0;
};

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  f << std::setprecision(17);
  return f;
}

void write_json(const std::filesystem::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

std::uint64_t run_seed(const Context& ctx, int r) { return rng::replica_seed(ctx.seed, static_cast<std::uint64_t>(r)); }

json run_header(const Context& ctx, const std::string& name) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["subcommand"] = name;
  j["seed"] = ctx.seed;
  j["replicas"] = ctx.replicas;
  j["config_hash"] = hex64(ctx.hash);
  j["warnings"] = ctx.cfg.warnings;
  j["config"] = ctx.cfg.doc.text;
  return j;
}

std::string replica_prefix(const Context& ctx, int r) {
  if (ctx.replicas == 1) return "trajectory";
  std::ostringstream s;
  s << "replica_" << std::setw(3) << std::setfill('0') << r;
  return s.str();
}

void write_record(const Context& ctx, const std::string& prefix, TrajectoryRecord rec) {
  if (!ctx.cfg.write_snapshots) rec.snapshots.clear();
  write_trajectory(ctx.out, prefix, rec, ctx.cfg.grid, ctx.cfg.doc.text);
}

void write_tails(const std::filesystem::path& p, const KineticTails& t) {
  auto f = open_out(p);
  f << "kind,parameter,value\n";
  for (std::size_t i = 0; i < t.M.size(); ++i) f << "infinity," << t.M[i] << ',' << t.infinity_mass[i] << '\n';
  for (std::size_t i = 0; i < t.beta.size(); ++i) f << "zero," << t.beta[i] << ',' << t.zero_mass[i] << '\n';
}

// ---------------------------------------------------------------- simulate

int simulate(const Context& ctx, std::ostream& out) {
  std::vector<TrajectoryRecord> recs(ctx.replicas);
  parallel_for(recs.size(), ctx.threads,
               [&](std::size_t r) { recs[r] = run(ctx.cfg.solver_config(run_seed(ctx, static_cast<int>(r)))); });

  KineticHistogram merged(ctx.cfg.kinetic_levels);
  json summary = run_header(ctx, "simulate");
  json runs = json::array();
  for (int r = 0; r < ctx.replicas; ++r) {
    const auto& rec = recs[r];
    const KineticHistogram h = accumulate_kinetic_measure(rec, ctx.cfg.kinetic_levels);
    merged.merge(h);
    runs.push_back({{"replica", r},
                    {"prefix", replica_prefix(ctx, r)},
                    {"seed", rec.seed},
                    {"relative_mass_drift", rec.relative_mass_drift()},
                    {"min_rho", rec.series.empty() ? 0.0 : std::min_element(rec.series.begin(), rec.series.end(),
                                                                           [](const auto& a, const auto& b) {
                                                                             return a.min_rho < b.min_rho;
                                                                           })->min_rho},
                    {"unreliable", rec.unreliable}});
    write_record(ctx, replica_prefix(ctx, r), rec);
    out << "replica " << r << " mass_drift " << rec.relative_mass_drift() << (rec.unreliable ? " unreliable" : "")
        << '\n';
  }
  {
    auto f = open_out(ctx.out / "kinetic.csv");
    write_histogram_csv(f, merged);
  }
  write_tails(ctx.out / "tails.csv", kinetic_tails(merged, ctx.cfg.tail_max_M));
  summary["runs"] = runs;
  write_json(ctx.out / "run.json", summary);
  return kExitOk;
}

// -------------------------------------------------------------- uniqueness

int uniqueness(const Context& ctx, std::ostream& out) {
  struct Pair {
    L1Series series;
    double initial = 0.0;
    bool identical = false;
  };
  std::vector<Pair> pairs(ctx.replicas);
  parallel_for(pairs.size(), ctx.threads, [&](std::size_t r) {
    SolverConfig a = ctx.cfg.solver_config(run_seed(ctx, static_cast<int>(r)));
    if (a.snapshot_stride == 0) a.snapshot_stride = 1;
    SolverConfig b = a;
    b.initial = ctx.cfg.perturbed_field();
    const Solver sa(a), sb(b);
    const NoisePath path = sa.noise_path();
    const TrajectoryRecord ra = sa.run(path);
    const TrajectoryRecord rb = sb.run(path);
    pairs[r].series = l1_series(ra, rb);
    pairs[r].initial = l1_distance(a.initial, b.initial);
    pairs[r].identical = pairs[r].series.sup() == 0.0;
  });

  json summary = run_header(ctx, "uniqueness");
  json runs = json::array();
  auto f = open_out(ctx.out / "l1_series.csv");
  f << "replica,t,l1\n";
  double mean_sup = 0.0;
  for (int r = 0; r < ctx.replicas; ++r) {
    const auto& p = pairs[r];
    for (std::size_t i = 0; i < p.series.times.size(); ++i)
      f << r << ',' << p.series.times[i] << ',' << p.series.values[i] << '\n';
    const double sup = p.series.sup();
    mean_sup += sup / ctx.replicas;
    const double amp = p.initial > 0.0 ? sup / p.initial : (sup == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    runs.push_back({{"replica", r}, {"sup_l1", sup}, {"initial_l1", p.initial}, {"amplification", amp}});
    out << "replica " << r << " sup_l1 " << sup << " initial_l1 " << p.initial << " amplification " << amp << '\n';
  }
  summary["runs"] = runs;
  summary["mean_sup_l1"] = mean_sup;
  write_json(ctx.out / "uniqueness.json", summary);
  return kExitOk;
}

// ------------------------------------------------------------------ ladder

struct LevelResult {
  RealField final_field;
  double budget = 0.0;
  double excess = 0.0;
};

int ladder(const Context& ctx, std::ostream& out) {
  struct Level {
    std::string ladder;
    double parameter;
    SolverConfig cfg;
  };
  std::vector<Level> levels;
  for (int n : ctx.cfg.n_ladder) {
    SolverConfig c = ctx.cfg.solver_config(0);
    c.sigma_n = n;
    levels.push_back({"n", static_cast<double>(n), c});
  }
  for (double g : ctx.cfg.gamma_ladder) {
    SolverConfig c = ctx.cfg.solver_config(0);
    c.gamma = g;
    levels.push_back({"gamma", g, c});
  }
  if (levels.empty()) levels.push_back({"base", static_cast<double>(ctx.cfg.sigma_n), ctx.cfg.solver_config(0)});
  for (const auto& l : levels) l.cfg.validate();

  const std::size_t L = levels.size();
  std::vector<LevelResult> results(L * ctx.replicas);
  parallel_for(results.size(), ctx.threads, [&](std::size_t job) {
    const std::size_t li = job % L;
    const int r = static_cast<int>(job / L);
    SolverConfig c = levels[li].cfg;
    c.seed = run_seed(ctx, r);
    const TrajectoryRecord rec = run(c);
    const EntropyReport rep = entropy_report(rec);
    results[job] = {rec.final_field(), rep.budget(), rep.budget() - rep.entropy.front()};
  });

  json summary = run_header(ctx, "ladder");
  json rows = json::array();
  auto f = open_out(ctx.out / "ladder.csv");
  f << "ladder,level,parameter,l1_to_previous,budget,excess\n";
  for (std::size_t li = 0; li < L; ++li) {
    const bool first = li == 0 || levels[li - 1].ladder != levels[li].ladder;
    double diff = 0.0, budget = 0.0, excess = 0.0;
    for (int r = 0; r < ctx.replicas; ++r) {
      const auto& cur = results[r * L + li];
      if (!first) diff += l1_distance(cur.final_field, results[r * L + li - 1].final_field) / ctx.replicas;
      budget += cur.budget / ctx.replicas;
      excess += cur.excess / ctx.replicas;
    }
    const double shown = first ? std::numeric_limits<double>::quiet_NaN() : diff;
    f << levels[li].ladder << ',' << li << ',' << levels[li].parameter << ',' << shown << ',' << budget << ','
      << excess << '\n';
    json row{{"ladder", levels[li].ladder}, {"parameter", levels[li].parameter}, {"budget", budget},
             {"excess", excess}};
    if (!first) row["l1_to_previous"] = diff;
    rows.push_back(row);
    out << levels[li].ladder << ' ' << levels[li].parameter << " budget " << budget;
    if (!first) out << " l1_to_previous " << diff;
    out << '\n';
  }
  summary["levels"] = rows;
  write_json(ctx.out / "ladder.json", summary);
  return kExitOk;
}

// ---------------------------------------------------------------- particles

long particle_steps(const ExperimentConfig& cfg) {
  const double ratio = (cfg.t_end - cfg.t_start) / cfg.particle_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("particle_dt does not divide the time window");
  return std::lround(ratio);
}

KernelSpec particle_kernel(const ExperimentConfig& cfg) {
  return cfg.gamma ? mollify(cfg.kernel, *cfg.gamma) : cfg.kernel;
}

ParticleState simulate_particles(const ExperimentConfig& cfg, long count, std::uint64_t seed, ParticleState* initial) {
  ParticleState s = sample_particles(static_cast<std::size_t>(count), cfg.grid.dim(), cfg.density(cfg.initial),
                                     cfg.density_bound(cfg.initial), rng::derive_seed(seed, 1));
  s.t = cfg.t_start;
  if (initial) *initial = s;
  return run_particles(std::move(s), cfg.particle_dt, particle_steps(cfg), particle_kernel(cfg),
                       rng::derive_seed(seed, 2));
}

int particles(const Context& ctx, std::ostream& out) {
  const long N = ctx.cfg.particle_counts.front();
  std::vector<ParticleState> start(ctx.replicas), end(ctx.replicas);
  parallel_for(end.size(), ctx.threads, [&](std::size_t r) {
    end[r] = simulate_particles(ctx.cfg, N, run_seed(ctx, static_cast<int>(r)), &start[r]);
  });
  auto f = open_out(ctx.out / "positions.csv");
  f << "replica,t,i";
  for (int a = 0; a < ctx.cfg.grid.dim(); ++a) f << ",x" << (a + 1);
  f << '\n';
  std::vector<RealField> densities;
  for (int r = 0; r < ctx.replicas; ++r) {
    for (const auto* s : {&start[r], &end[r]}) {
      std::ostringstream rows;
      write_positions_csv(rows, *s, false);
      std::istringstream in(rows.str());
      for (std::string line; std::getline(in, line);) f << r << ',' << line << '\n';
    }
    densities.push_back(empirical_density(end[r], ctx.cfg.grid, ctx.cfg.effective_bandwidth()).rho);
  }
  {
    std::ofstream bin(ctx.out / "density.bin", std::ios::binary);
    write_snapshots(bin, densities);
  }
  json summary = run_header(ctx, "particles");
  summary["particles"] = N;
  summary["steps"] = particle_steps(ctx.cfg);
  summary["bandwidth"] = ctx.cfg.effective_bandwidth();
  write_json(ctx.out / "particles.json", summary);
  out << "particles " << N << " replicas " << ctx.replicas << " t " << end.front().t << '\n';
  return kExitOk;
}

// ----------------------------------------------------------------- compare

int compare(const Context& ctx, std::ostream& out) {
  const TrajectoryRecord mean_field = mean_field_run(ctx.cfg.solver_config(ctx.seed));
  const RealField& target = mean_field.final_field();
  const auto& counts = ctx.cfg.particle_counts;
  const std::size_t jobs = counts.size() * ctx.replicas;
  std::vector<double> l1(jobs);
  std::vector<RealField> fluct(counts.size());
  parallel_for(jobs, ctx.threads, [&](std::size_t job) {
    const std::size_t ni = job / ctx.replicas;
    const int r = static_cast<int>(job % ctx.replicas);
    const ParticleState end = simulate_particles(ctx.cfg, counts[ni], run_seed(ctx, r), nullptr);
    const RealField rho = empirical_density(end, ctx.cfg.grid, ctx.cfg.effective_bandwidth()).rho;
    l1[job] = l1_distance(rho, target);
    if (r == 0) fluct[ni] = fluctuation_field(rho, target, static_cast<std::size_t>(counts[ni]));
  });

  json summary = run_header(ctx, "compare");
  json rows = json::array();
  auto f = open_out(ctx.out / "compare.csv");
  f << "N,replica,l1\n";
  std::vector<double> means;
  for (std::size_t ni = 0; ni < counts.size(); ++ni) {
    double mean = 0.0;
    for (int r = 0; r < ctx.replicas; ++r) {
      f << counts[ni] << ',' << r << ',' << l1[ni * ctx.replicas + r] << '\n';
      mean += l1[ni * ctx.replicas + r] / ctx.replicas;
    }
    means.push_back(mean);
    rows.push_back({{"N", counts[ni]}, {"mean_l1", mean}});
    out << "N " << counts[ni] << " mean_l1 " << mean << '\n';
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < means.size(); ++i) decreasing = decreasing && means[i] < means[i - 1];
  {
    std::ofstream bin(ctx.out / "fluctuations.bin", std::ios::binary);
    write_snapshots(bin, fluct);
  }
  write_record(ctx, "mean_field", mean_field);
  summary["ladder"] = rows;
  summary["decreasing"] = decreasing;
  write_json(ctx.out / "compare.json", summary);
  return kExitOk;
}

// ------------------------------------------------------------ kernel-audit

int kernel_audit(const Context& ctx, std::ostream& out) {
  const KernelSpec& v = ctx.cfg.kernel;
  json summary = run_header(ctx, "kernel-audit");
  summary["label"] = v.label;
  const double div_max = lp_norm(inverse(divergence_of(v)), kInfinity);
  double symmetry = 0.0;
  for (const auto& c : v.components) symmetry = std::max(symmetry, c.conjugate_symmetry_defect());
  summary["max_abs_divergence"] = div_max;
  summary["conjugate_symmetry_defect"] = symmetry;
  std::string verdict = "undeclared";
  if (v.exponents) {
    const auto& e = *v.exponents;
    const LpsReport rep = check_lps(ctx.cfg.grid.dim(), e);
    auto exp = [](double x) { return std::isinf(x) ? json("inf") : json(x); };
    summary["exponents"] = {{"p", exp(e.p)}, {"pstar", exp(e.pstar)}, {"q", exp(e.q)}, {"qstar", exp(e.qstar)}};
    summary["a1_lhs"] = rep.a1_lhs;
    summary["a2_lhs"] = rep.a2_lhs;
    summary["a1_pass"] = rep.a1_pass;
    summary["a2_pass"] = rep.a2_pass;
    verdict = rep.summary();
  }
  summary["verdict"] = verdict;
  write_json(ctx.out / "kernel-audit.json", summary);
  {
    auto f = open_out(ctx.out / "kernel.table");
    write_kernel_table(f, v);
  }
  out << v.label << ": " << verdict << '\n';
  out << "max |div V| " << div_max << '\n';
  return kExitOk;
}

// ----------------------------------------------------------- entropy-audit

int entropy_audit(const Context& ctx, std::ostream& out) {
  std::vector<EntropyReport> reps(ctx.replicas);
  parallel_for(reps.size(), ctx.threads, [&](std::size_t r) {
    reps[r] = entropy_report(run(ctx.cfg.solver_config(run_seed(ctx, static_cast<int>(r)))));
  });
  json summary = run_header(ctx, "entropy-audit");
  json runs = json::array();
  auto f = open_out(ctx.out / "entropy.csv");
  f << "replica,t,entropy,rho_log_rho,dissipation,running_sup_entropy,dissipation_integral\n";
  for (int r = 0; r < ctx.replicas; ++r) {
    const auto& e = reps[r];
    bool monotone = true;
    for (std::size_t i = 0; i < e.times.size(); ++i) {
      f << r << ',' << e.times[i] << ',' << e.entropy[i] << ',' << e.rho_log_rho[i] << ',' << e.dissipation[i] << ','
        << e.running_sup_entropy[i] << ',' << e.dissipation_integral[i] << '\n';
      if (i > 0 && !(e.entropy[i] <= e.entropy[i - 1])) monotone = false;
    }
    runs.push_back({{"replica", r},
                    {"monotone", monotone},
                    {"finite", e.finite()},
                    {"initial_entropy", e.entropy.front()},
                    {"budget", e.budget()},
                    {"excess", e.budget() - e.entropy.front()}});
    out << "replica " << r << " monotone " << (monotone ? "yes" : "no") << " budget " << e.budget() << '\n';
  }
  summary["runs"] = runs;
  write_json(ctx.out / "entropy-audit.json", summary);
  return kExitOk;
}

void report_error(const std::string& kind, const std::string& message, const std::string& name,
                  const std::filesystem::path& out_dir, std::ostream& err, int code, const NumericalAbort* abort) {
  json rec{{"error", kind}, {"message", message}, {"subcommand", name}, {"exit_code", code}};
  if (abort) {
    rec["t"] = abort->time();
    rec["step"] = abort->step();
  }
  err << rec.dump() << '\n';
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!ec) {
    std::ofstream f(out_dir / "error.json");
    if (f) f << rec.dump(2) << '\n';
  }
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate",  "uniqueness",   "ladder",       "particles",
                                              "compare",   "kernel-audit", "entropy-audit"};
  return names;
}

int resolve_threads(const std::optional<int>& flag) {
  if (flag && *flag > 0) return *flag;
  if (const char* env = std::getenv("DK_SIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

int run_subcommand(const std::string& name, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  std::filesystem::path out_dir = opts.out.value_or("out");
  try {
    Context ctx;
    ctx.cfg = load_config_file(opts.config);
    ctx.out = opts.out.value_or(ctx.cfg.out_dir);
    out_dir = ctx.out;
    ctx.seed = opts.seed.value_or(ctx.cfg.seed);
    ctx.replicas = opts.replicas.value_or(ctx.cfg.replicas);
    if (ctx.replicas < 1) throw ConfigError("--replicas must be >= 1");
    ctx.threads = resolve_threads(opts.threads);
    ctx.hash = fnv1a64(ctx.cfg.doc.text + "\nseed=" + std::to_string(ctx.seed) +
                       "\nreplicas=" + std::to_string(ctx.replicas));
    std::filesystem::create_directories(ctx.out);
    for (const auto& w : ctx.cfg.warnings) err << "warning: " << w << '\n';
    out << "config_hash " << hex64(ctx.hash) << '\n';

    if (name == "simulate") return simulate(ctx, out);
    if (name == "uniqueness") return uniqueness(ctx, out);
    if (name == "ladder") return ladder(ctx, out);
    if (name == "particles") return particles(ctx, out);
    if (name == "compare") return compare(ctx, out);
    if (name == "kernel-audit") return kernel_audit(ctx, out);
    if (name == "entropy-audit") return entropy_audit(ctx, out);
    throw ConfigError("unknown subcommand '" + name + "'");
  } catch (const ConfigError& e) {
    report_error("config", e.what(), name, out_dir, err, kExitConfig, nullptr);
    return kExitConfig;
  } catch (const NumericalAbort& e) {
    report_error("numerical", e.what(), name, out_dir, err, kExitNumerical, &e);
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    report_error("config", e.what(), name, out_dir, err, kExitConfig, nullptr);
    return kExitConfig;
  } catch (const std::exception& e) {
    report_error("numerical", e.what(), name, out_dir, err, kExitNumerical, nullptr);
    return kExitNumerical;
  }
}

}  // namespace dk::cli
