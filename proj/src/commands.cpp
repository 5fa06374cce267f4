#include "zpf/commands.hpp"

#include "zpf/boson.hpp"
#include "zpf/ed.hpp"
#include "zpf/gram.hpp"
#include "zpf/oracle.hpp"
#include "zpf/report.hpp"
#include "zpf/zeropoint.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace zpf {

namespace fs = std::filesystem;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kNames{"saddle", "coeffs",        "fluct", "sweep-p",
                                      "sweep-d", "gram-spectrum", "ed",    "crosscheck"};

const std::map<std::string, std::vector<std::string>>& key_table() {
  static const std::map<std::string, std::vector<std::string>> t{
      {"saddle", {"model", "p", "h", "D", "tol", "max_iter", "cache_dir"}},
      {"coeffs", {"model", "p", "h", "D", "L", "N_k", "tol", "max_iter", "cache_dir"}},
      {"fluct", {"model", "p", "h", "D", "L", "N_k", "tol", "max_iter", "cache_dir"}},
      {"sweep-p",
       {"model", "p_list", "D", "L", "N_k", "tol", "max_iter", "cache_dir", "reference", "ref_D",
        "ref_tol", "ref_max_iter", "ed_sizes"}},
      {"sweep-d",
       {"model", "p", "h", "D", "L", "N_k", "tol", "max_iter", "cache_dir", "reference", "ref_D",
        "ref_tol", "ref_max_iter", "ed_sizes"}},
      {"gram-spectrum", {"L", "y_max", "tol"}},
      {"ed", {"model", "p", "h", "N", "bc", "excited", "ed_tol"}},
      {"crosscheck",
       {"model", "p", "h", "D", "L", "horizon", "tol", "max_iter", "cache_dir", "corrupt",
        "oracle", "oracle_N", "oracle_margin", "oracle_tol"}},
  };
  return t;
}

// Keys of the global block: every command key plus the run-wide settings.
std::vector<std::string> global_keys() {
  std::vector<std::string> all{"seed", "out_dir", "threads"};
  for (const auto& [cmd, keys] : key_table())
    for (const auto& k : keys)
      if (std::find(all.begin(), all.end(), k) == all.end()) all.push_back(k);
  return all;
}

void say(const CommandContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << std::endl;
}

std::string out_path(const CommandContext& ctx, const std::string& file) {
  fs::create_directories(ctx.out_dir);
  return (fs::path(ctx.out_dir) / file).string();
}

std::string cache_dir(const CommandContext& ctx, const std::string& sec) {
  if (!ctx.cache) return "";
  return ctx.config.str(sec, "cache_dir", (fs::path(ctx.out_dir) / "cache").string());
}

void finish(const CommandContext& ctx, const std::string& command, CommandResult& res) {
  Manifest m;
  m.command = command;
  m.config = ctx.config.serialize();
  m.seed = ctx.seed;
  m.threads = ctx.threads;
  m.cache = ctx.cache;
  m.outputs = res.outputs;
  m.notes = res.notes;
  const std::string path = out_path(ctx, command + ".manifest.txt");
  write_manifest(path, m);
  res.outputs.push_back(path);
}

SpinModel model_from(const RunConfig& cfg, const std::string& sec, const std::string& name_dflt,
                     double p_dflt) {
  const std::string name = cfg.str(sec, "model", name_dflt);
  if (name == "blbq") return blbq(cfg.num(sec, "p", p_dflt));
  if (name == "heis_stag") return heisenberg_staggered(cfg.num(sec, "h", 0.2));
  throw ConfigError("unknown model '" + name + "' (expected blbq or heis_stag)");
}

std::string model_label(const SpinModel& m) {
  std::ostringstream os;
  os << m.name;
  for (const auto& [k, v] : m.params) os << ' ' << k << '=' << format_number(v);
  return os.str();
}

int positive(const RunConfig& cfg, const std::string& sec, const std::string& key, int dflt) {
  const int v = cfg.integer(sec, key, dflt);
  if (v < 1) throw ConfigError(key + " must be positive");
  return v;
}

struct Common {
  double tol;
  int max_iter;
  int L;
  int N_k;
};

Common common(const RunConfig& cfg, const std::string& sec) {
  Common c;
  c.tol = cfg.num(sec, "tol", 1e-9);
  c.max_iter = positive(cfg, sec, "max_iter", 20000);
  c.L = cfg.integer(sec, "L", 0);
  c.N_k = positive(cfg, sec, "N_k", 512);
  if (c.tol <= 0) throw ConfigError("tol must be positive");
  if (c.L < 0) throw ConfigError("L must be >= 0 (0 selects the default window)");
  return c;
}

std::string saddle_key(const SpinModel& model, int D, unsigned seed, double tol, int max_iter) {
  std::ostringstream os;
  os << reference_key(model, D, tol) << '_' << seed << '_' << max_iter;
  return os.str();
}

SaddleReport from_file(const SpinModel& model, const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read '" + file.string() + "'");
  SaddleReport r;
  const SiteTensor a = load_tensor(in);
  int conv = 0;
  if (!(in >> r.grad_norm >> r.iterations >> conv)) throw Error("truncated saddle cache");
  r.converged = conv != 0;
  r.mps = canonicalize(a);
  r.energy_density = energy_density(r.mps, model);
  return r;
}

struct Reference {
  double value = kNaN;
  std::string source;
};

Reference reference_for(const CommandContext& ctx, const std::string& sec, const SpinModel& model) {
  const RunConfig& cfg = ctx.config;
  const std::string kind = cfg.str(sec, "reference", "mps");
  Reference r;
  if (kind == "mps") {
    ReferenceOptions ro;
    const int D_ref = positive(cfg, sec, "ref_D", 50);
    ro.tol = cfg.num(sec, "ref_tol", 1e-6);
    ro.max_iter = positive(cfg, sec, "ref_max_iter", 6000);
    ro.seed = ctx.seed;
    ro.cache_dir = cache_dir(ctx, sec);
    r.value = reference_energy(model, D_ref, ro);
    r.source = "mps D=" + std::to_string(D_ref);
  } else if (kind == "ed") {
    const auto sizes = cfg.ints(sec, "ed_sizes", model.d == 2 ? std::vector<int>{16, 18, 20}
                                                              : std::vector<int>{8, 10, 12});
    r.value = ed_extrapolate(model, sizes);
    r.source = "ed";
  } else {
    try {
      r.value = parse_number(kind);
    } catch (const ConfigError&) {
      throw ConfigError("reference must be mps, ed or a number");
    }
    r.source = "fixed";
  }
  return r;
}

struct PointResult {
  int D = 0;
  double E_mps = kNaN;
  double E_fluct = kNaN;
  double E_total = kNaN;
  std::string flag = "ok";
  std::string detail;
};

PointResult fluct_point(const CommandContext& ctx, const std::string& sec, const SpinModel& base,
                        int D, const Common& c) {
  PointResult pr;
  pr.D = D;
  try {
    const auto st = prepare_state(base, D, ctx.seed, c.tol, c.max_iter, cache_dir(ctx, sec));
    pr.E_mps = st.saddle.energy_density;
    std::vector<std::string> flags;
    if (!st.saddle.converged) flags.push_back("not_converged");
    const auto fr = fluctuation_correction(st.saddle.mps, st.model, c.L, c.N_k);
    pr.E_fluct = fr.disp.efluct;
    pr.E_total = pr.E_mps + pr.E_fluct;
    if (fr.disp.unstable) flags.push_back("unstable");
    if (!fr.disp.warnings.empty()) {
      flags.push_back("warning");
      pr.detail = fr.disp.warnings.front();
    }
    if (!flags.empty()) {
      pr.flag.clear();
      for (std::size_t i = 0; i < flags.size(); ++i) pr.flag += (i ? "|" : "") + flags[i];
    }
  } catch (const Error& e) {
    pr.flag = "error";
    pr.detail = e.what();
  }
  return pr;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

const std::vector<std::string>& command_names() { return kNames; }

const std::vector<std::string>& command_keys(const std::string& command) {
  const auto it = key_table().find(command);
  if (it == key_table().end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (!first) first = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

PreparedState prepare_state(const SpinModel& base, int D, unsigned seed, double tol, int max_iter,
                            const std::string& cache) {
  PreparedState ps;
  ps.model = base;
  if (D == 1 && base.name == "blbq") ps.model = sublattice_rotate(base);

  auto solve = [&] {
    SaddleOptions so;
    so.seed = seed;
    so.tol = tol;
    so.max_iter = max_iter;
    if (D == 1) return refine_saddle(ps.model, neel_state(ps.model.d), so);
    return find_saddle(ps.model, D, so);
  };
  if (cache.empty()) {
    ps.saddle = solve();
    return ps;
  }
  const fs::path file =
      fs::path(cache) / ("saddle_" + saddle_key(ps.model, D, seed, tol, max_iter) + ".txt");
  if (fs::exists(file)) {
    try {
      ps.saddle = from_file(ps.model, file);
      ps.from_cache = true;
      return ps;
    } catch (const Error&) {
    }
  }
  const SaddleReport rep = solve();
  fs::create_directories(cache);
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp);
    save_tensor(out, rep.mps.A);
    out << std::setprecision(17) << rep.grad_norm << ' ' << rep.iterations << ' '
        << (rep.converged ? 1 : 0) << '\n';
  }
  fs::rename(tmp, file);
  // Always continue from the stored tensor so cold and warm runs agree bitwise.
  ps.saddle = from_file(ps.model, file);
  return ps;
}

CommandResult run_command(const std::string& command, const CommandContext& ctx) {
  CommandResult res;
  try {
    if (ctx.threads < 1) throw ConfigError("threads must be positive");
    command_keys(command);
    ctx.config.require_known("", global_keys());
    for (const auto& e : ctx.config.entries())
      if (!e.section.empty() && !key_table().count(e.section))
        throw ConfigError("unknown section [" + e.section + "]");
    ctx.config.require_known(command, command_keys(command));

    if (command == "saddle") return cmd_saddle(ctx);
    if (command == "coeffs") return cmd_coeffs(ctx);
    if (command == "fluct") return cmd_fluct(ctx);
    if (command == "sweep-p") return cmd_sweep_p(ctx);
    if (command == "sweep-d") return cmd_sweep_d(ctx);
    if (command == "gram-spectrum") return cmd_gram(ctx);
    if (command == "ed") return cmd_ed(ctx);
    return cmd_crosscheck(ctx);
  } catch (const ConfigError& e) {
    res.exit_code = kExitConfig;
    res.notes.push_back(std::string("configuration error: ") + e.what());
  } catch (const std::exception& e) {
    res.exit_code = kExitNumerical;
    res.notes.push_back(std::string("numerical error: ") + e.what());
  }
  if (ctx.log)
    for (const auto& n : res.notes) *ctx.log << n << std::endl;
  return res;
}

CommandResult cmd_saddle(const CommandContext& ctx) {
  const std::string sec = "saddle";
  const RunConfig& cfg = ctx.config;
  const SpinModel model = model_from(cfg, sec, "blbq", 0.633);
  const Common c = common(cfg, sec);
  const auto Ds = cfg.ints(sec, "D", {2});
  for (int D : Ds)
    if (D < 1) throw ConfigError("D must be positive");

  std::vector<PreparedState> states(Ds.size());
  parallel_for(static_cast<int>(Ds.size()), ctx.threads, [&](int i) {
    states[i] = prepare_state(model, Ds[i], ctx.seed, c.tol, c.max_iter, cache_dir(ctx, sec));
  });

  CommandResult res;
  CsvWriter csv(out_path(ctx, "saddle.csv"),
                {"D", "energy", "grad_norm", "iterations", "converged", "xi"});
  for (std::size_t i = 0; i < Ds.size(); ++i) {
    const auto& s = states[i].saddle;
    csv.row({(long long)Ds[i], s.energy_density, s.grad_norm, (long long)s.iterations,
             std::string(s.converged ? "true" : "false"), s.mps.xi});
    const std::string tpath = out_path(ctx, "saddle_D" + std::to_string(Ds[i]) + ".tensor");
    std::ofstream out(tpath);
    save_tensor(out, s.mps.A);
    res.outputs.push_back(tpath);
    say(ctx, "D=" + std::to_string(Ds[i]) + " energy " + csv_number(s.energy_density) +
                 (s.converged ? "" : " (not converged)"));
    if (!s.converged) {
      res.exit_code = kExitNumerical;
      res.notes.push_back("D=" + std::to_string(Ds[i]) + " did not reach tol");
    }
  }
  res.outputs.insert(res.outputs.begin(), csv.path());
  res.notes.push_back("model " + model_label(model));
  finish(ctx, sec, res);
  return res;
}

CommandResult cmd_coeffs(const CommandContext& ctx) {
  const std::string sec = "coeffs";
  const RunConfig& cfg = ctx.config;
  const SpinModel model = model_from(cfg, sec, "blbq", 0.633);
  const Common c = common(cfg, sec);
  const int D = positive(cfg, sec, "D", 2);
  const auto st = prepare_state(model, D, ctx.seed, c.tol, c.max_iter, cache_dir(ctx, sec));
  const auto fr = fluctuation_correction(st.saddle.mps, st.model, c.L, c.N_k);
  const auto& bq = fr.bq;

  CommandResult res;
  CsvWriter csv(out_path(ctx, "coeffs.csv"), {"x", "mu", "nu", "re", "im", "kind"});
  auto dump = [&](int x, const Matrix& m, const std::string& kind) {
    for (int mu = 0; mu < m.rows(); ++mu)
      for (int nu = 0; nu < m.cols(); ++nu)
        csv.row({(long long)x, (long long)mu, (long long)nu, m(mu, nu).real(), m(mu, nu).imag(),
                 kind});
  };
  for (int x = -bq.L; x <= bq.L; ++x) dump(x, bq.eps_at(x), "eps");
  for (int x = 1; x <= static_cast<int>(bq.delta_prime.size()); ++x)
    dump(x, bq.delta_prime[x - 1], "delta_prime");
  for (int x = 1; x <= static_cast<int>(bq.delta.size()); ++x) dump(x, bq.delta[x - 1], "delta");
  res.outputs.push_back(csv.path());
  std::ostringstream os;
  os << "model " << model_label(st.model) << ", D=" << D << ", L=" << bq.L << ", m=" << bq.m
     << ", E0=" << csv_number(bq.E0)
     << ", max|h|=" << csv_number(bq.gradient.size() ? bq.gradient.cwiseAbs().maxCoeff() : 0.0);
  res.notes.push_back(os.str());
  for (const auto& w : fr.disp.warnings) res.notes.push_back("warning: " + w);
  say(ctx, os.str());
  finish(ctx, sec, res);
  return res;
}

CommandResult cmd_fluct(const CommandContext& ctx) {
  const std::string sec = "fluct";
  const RunConfig& cfg = ctx.config;
  const SpinModel model = model_from(cfg, sec, "blbq", 0.633);
  const Common c = common(cfg, sec);
  const int D = positive(cfg, sec, "D", 2);
  const auto st = prepare_state(model, D, ctx.seed, c.tol, c.max_iter, cache_dir(ctx, sec));
  const auto fr = fluctuation_correction(st.saddle.mps, st.model, c.L, c.N_k);
  const auto& disp = fr.disp;

  CommandResult res;
  CsvWriter csv(out_path(ctx, "dispersion.csv"), {"k", "n", "omega_re", "omega_im"});
  for (int i = 0; i < disp.kgrid.size(); ++i)
    for (int n = 0; n < disp.omega.cols(); ++n)
      csv.row({disp.kgrid(i), (long long)n, disp.omega(i, n), disp.omega_imag(i, n)});
  std::string flags = disp.unstable ? "unstable" : "ok";
  if (!st.saddle.converged) flags += "|not_converged";
  if (!disp.warnings.empty()) flags += "|warning";
  CsvWriter sum(out_path(ctx, "fluct_summary.csv"),
                {"E0", "efluct", "e_total", "max_imag", "flags"});
  sum.row({disp.E0, disp.efluct, disp.e_total, disp.max_imag, flags});
  res.outputs = {csv.path(), sum.path()};

  std::vector<Series> series;
  for (int n = 0; n < disp.omega.cols() && n < 6; ++n) {
    Series s;
    s.name = "band " + std::to_string(n);
    s.color = kPalette[n % 6];
    for (int i = 0; i < disp.kgrid.size(); ++i) {
      s.x.push_back(disp.kgrid(i));
      s.y.push_back(disp.omega(i, n));
    }
    series.push_back(s);
  }
  const std::string svg = out_path(ctx, "dispersion.svg");
  write_svg_chart(svg, {"Bogoliubov dispersion", "k", "omega", false}, series);
  res.outputs.push_back(svg);
  res.notes.push_back("model " + model_label(st.model) + ", D=" + std::to_string(D) +
                      ", L=" + std::to_string(fr.bq.L));
  for (const auto& w : disp.warnings) res.notes.push_back("warning: " + w);
  say(ctx, "E0 " + csv_number(disp.E0) + " efluct " + csv_number(disp.efluct) + " e_total " +
               csv_number(disp.e_total) + " [" + flags + "]");
  finish(ctx, sec, res);
  return res;
}

CommandResult cmd_sweep_p(const CommandContext& ctx) {
  const std::string sec = "sweep-p";
  const RunConfig& cfg = ctx.config;
  if (cfg.str(sec, "model", "blbq") != "blbq") throw ConfigError("sweep-p requires model = blbq");
  const Common c = common(cfg, sec);
  const auto ps = cfg.nums(sec, "p_list", {-0.2, 0.0, 0.1, 1.0 / 3.0, 0.5, 0.633, 0.8});
  const auto Ds = cfg.ints(sec, "D", {1, 2});
  for (int D : Ds)
    if (D < 1) throw ConfigError("D must be positive");
  const int np = static_cast<int>(ps.size());
  const int nd = static_cast<int>(Ds.size());

  std::vector<Reference> refs(np);
  std::vector<PointResult> pts(np * nd);
  std::mutex log_mu;
  parallel_for(np * (nd + 1), ctx.threads, [&](int job) {
    const int ip = job / (nd + 1);
    const int id = job % (nd + 1);
    const SpinModel model = blbq(ps[ip]);
    if (id == nd) {
      refs[ip] = reference_for(ctx, sec, model);
    } else {
      pts[ip * nd + id] = fluct_point(ctx, sec, model, Ds[id], c);
      std::lock_guard<std::mutex> lock(log_mu);
      say(ctx, "p=" + format_number(ps[ip]) + " D=" + std::to_string(Ds[id]) + " " +
                   pts[ip * nd + id].flag);
    }
  });

  CommandResult res;
  CsvWriter csv(out_path(ctx, "sweep_p.csv"),
                {"p", "D", "E_mps", "E_fluct", "E_total", "E_ref", "surplus_mps", "surplus_total",
                 "flag"});
  std::vector<Series> series;
  for (int id = 0; id < nd; ++id) {
    Series dashed, solid;
    dashed.name = "D=" + std::to_string(Ds[id]) + " MPS";
    solid.name = "D=" + std::to_string(Ds[id]) + " corrected";
    dashed.dashed = true;
    dashed.color = solid.color = kPalette[id % 6];
    series.push_back(dashed);
    series.push_back(solid);
  }
  for (int ip = 0; ip < np; ++ip)
    for (int id = 0; id < nd; ++id) {
      const auto& pr = pts[ip * nd + id];
      const double ref = refs[ip].value;
      csv.row({ps[ip], (long long)pr.D, pr.E_mps, pr.E_fluct, pr.E_total, ref, pr.E_mps - ref,
               pr.E_total - ref, pr.flag});
      series[2 * id].x.push_back(ps[ip]);
      series[2 * id].y.push_back(pr.E_mps - ref);
      series[2 * id + 1].x.push_back(ps[ip]);
      series[2 * id + 1].y.push_back(pr.E_total - ref);
      if (!pr.detail.empty())
        res.notes.push_back("p=" + format_number(ps[ip]) + " D=" + std::to_string(pr.D) + ": " +
                            pr.detail);
    }
  const std::string svg = out_path(ctx, "sweep_p.svg");
  write_svg_chart(svg, {"BLBQ energy surplus", "p", "energy - E_ref", false}, series);
  res.outputs = {csv.path(), svg};
  if (np) res.notes.push_back("reference " + refs[0].source);
  finish(ctx, sec, res);
  return res;
}

CommandResult cmd_sweep_d(const CommandContext& ctx) {
  const std::string sec = "sweep-d";
  const RunConfig& cfg = ctx.config;
  const SpinModel model = model_from(cfg, sec, "heis_stag", 1.0 / 3.0 + 0.3);
  const Common c = common(cfg, sec);
  const auto Ds = cfg.ints(sec, "D", model.d == 2 ? std::vector<int>{1, 2, 3, 4, 5, 6}
                                                  : std::vector<int>{2, 3, 4, 5, 6});
  for (int D : Ds)
    if (D < 1) throw ConfigError("D must be positive");
  const int nd = static_cast<int>(Ds.size());

  Reference ref;
  std::vector<PointResult> pts(nd);
  std::mutex log_mu;
  parallel_for(nd + 1, ctx.threads, [&](int job) {
    if (job == nd) {
      ref = reference_for(ctx, sec, model);
      return;
    }
    pts[job] = fluct_point(ctx, sec, model, Ds[job], c);
    std::lock_guard<std::mutex> lock(log_mu);
    say(ctx, "D=" + std::to_string(Ds[job]) + " " + pts[job].flag);
  });

  CommandResult res;
  CsvWriter csv(out_path(ctx, "sweep_d.csv"),
                {"D", "E_mps", "E_total", "E_ref", "surplus_mps", "surplus_total", "flag"});
  Series dashed, solid;
  dashed.name = "MPS";
  dashed.dashed = true;
  solid.name = "corrected";
  solid.color = dashed.color = kPalette[0];
  for (const auto& pr : pts) {
    csv.row({(long long)pr.D, pr.E_mps, pr.E_total, ref.value, pr.E_mps - ref.value,
             pr.E_total - ref.value, pr.flag});
    dashed.x.push_back(pr.D);
    dashed.y.push_back(pr.E_mps - ref.value);
    solid.x.push_back(pr.D);
    solid.y.push_back(pr.E_total - ref.value);
    if (!pr.detail.empty()) res.notes.push_back("D=" + std::to_string(pr.D) + ": " + pr.detail);
  }
  const std::string svg = out_path(ctx, "sweep_d.svg");
  write_svg_chart(svg, {"Energy surplus vs bond dimension (" + model_label(model) + ")", "D",
                        "energy - E_ref", true},
                  {dashed, solid});
  res.outputs = {csv.path(), svg};
  res.notes.push_back("reference " + ref.source);
  finish(ctx, sec, res);
  return res;
}

CommandResult cmd_gram(const CommandContext& ctx) {
  const std::string sec = "gram-spectrum";
  const RunConfig& cfg = ctx.config;
  const int L = positive(cfg, sec, "L", 8);
  const int y_max = positive(cfg, sec, "y_max", 6);
  const double tol = cfg.num(sec, "tol", 1e-8);
  if (L < 2) throw ConfigError("L must be at least 2");

  const UniformMps mps = aklt_state();
  const TangentBasis basis(mps);
  const GramData g = build_gram(mps, basis, L);
  const auto an = aklt_analytic_spectrum(y_max);

  CommandResult res;
  CsvWriter csv(out_path(ctx, "gram_spectrum.csv"),
                {"y", "branch", "E_analytic", "E_numeric", "abs_err", "recurrence_residual"});
  bool ok = true;
  for (const auto& f : an.families)
    for (int b = 0; b < 2; ++b) {
      const double E = b == 0 ? f.e_plus : f.e_minus;
      double best = kNaN, err = std::numeric_limits<double>::infinity();
      for (int i = 0; i < g.eig_red.size(); ++i)
        if (std::abs(g.eig_red(i) - E) < err) {
          err = std::abs(g.eig_red(i) - E);
          best = g.eig_red(i);
        }
      const double resid = b == 0 ? f.residual_plus : f.residual_minus;
      ok = ok && err < tol && resid < tol;
      csv.row({(long long)f.y, std::string(b == 0 ? "+" : "-"), E, best, err, resid});
    }

  // Eigenvalue clusters of one reduced block.
  CsvWriter mult(out_path(ctx, "gram_multiplicities.csv"), {"E", "multiplicity"});
  for (int i = 0; i < g.eig_red.size();) {
    int j = i;
    while (j < g.eig_red.size() && std::abs(g.eig_red(j) - g.eig_red(i)) < 1e-6) ++j;
    mult.row({g.eig_red.segment(i, j - i).mean(), (long long)(j - i)});
    i = j;
  }
  res.outputs = {csv.path(), mult.path()};
  res.notes.push_back("L=" + std::to_string(L) + ", reduced dimension " +
                      std::to_string(g.reduced_dim()) + ", copies " + std::to_string(g.copies()) +
                      ", null_dim " + std::to_string(g.null_dim()) + " (reduced " +
                      std::to_string(g.null_red) + ")");
  res.notes.push_back(ok ? "all families within tolerance"
                         : "some families exceed tolerance " + csv_number(tol));
  say(ctx, res.notes.back());
  finish(ctx, sec, res);
  return res;
}

CommandResult cmd_ed(const CommandContext& ctx) {
  const std::string sec = "ed";
  const RunConfig& cfg = ctx.config;
  const SpinModel model = model_from(cfg, sec, "blbq", 1.0 / 3.0);
  const auto Ns = cfg.ints(sec, "N", {8});
  const Boundary bc = [&] {
    try {
      return parse_boundary(cfg.str(sec, "bc", "open"));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }();
  const bool excited = cfg.integer(sec, "excited", 0) != 0;
  EdOptions opts;
  opts.seed = ctx.seed;
  opts.tol = cfg.num(sec, "ed_tol", opts.tol);
  for (int N : Ns) {
    if (N < 2) throw ConfigError("N must be at least 2");
    if (std::pow(model.d, N) > kEdMaxDim) throw ConfigError("N too large for exact diagonalization");
  }

  std::vector<EdResult> out(Ns.size());
  parallel_for(static_cast<int>(Ns.size()), ctx.threads,
               [&](int i) { out[i] = ed_ground(model, Ns[i], bc, excited, opts); });

  CommandResult res;
  std::vector<std::string> header{"N", "bc", "energy", "density", "residual"};
  if (excited) header.push_back("excited");
  CsvWriter csv(out_path(ctx, "ed.csv"), header);
  for (const auto& r : out) {
    std::vector<CsvWriter::Cell> row{(long long)r.N, to_string(r.bc), r.energy, r.energy_density,
                                     r.residual};
    if (excited) row.push_back(r.excited);
    csv.row(row);
    say(ctx, "N=" + std::to_string(r.N) + " energy " + csv_number(r.energy));
  }
  res.outputs.push_back(csv.path());
  res.notes.push_back("model " + model_label(model));
  finish(ctx, sec, res);
  return res;
}

CommandResult cmd_crosscheck(const CommandContext& ctx) {
  const std::string sec = "crosscheck";
  const RunConfig& cfg = ctx.config;
  const SpinModel model = model_from(cfg, sec, "blbq", 0.633);
  const Common c = common(cfg, sec);
  const int D = positive(cfg, sec, "D", 2);
  const int horizon = cfg.integer(sec, "horizon", 0);
  const std::string corrupt = cfg.str(sec, "corrupt", "none");
  if (corrupt != "none" && corrupt != "delta_sign")
    throw ConfigError("corrupt must be none or delta_sign");
  const bool run_oracle = cfg.integer(sec, "oracle", 1) != 0;
  const int oN = positive(cfg, sec, "oracle_N", 10);
  const int margin = cfg.integer(sec, "oracle_margin", 3);
  const double otol = cfg.num(sec, "oracle_tol", 1e-5);
  const double ctol = cfg.num(sec, "tol", 1e-6);

  const auto st = prepare_state(model, D, ctx.seed, c.tol, c.max_iter, cache_dir(ctx, sec));
  const UniformMps& mps = st.saddle.mps;
  const TangentBasis basis(mps);
  const int L = c.L > 0 ? c.L : default_window(mps);

  BosonQuadratic direct = quadratic_coeffs(mps, basis, st.model, L);
  GramData gram;
  if (L >= 2 && basis.modes() > 0) {
    gram = build_gram(mps, basis, L);
    delta_from_prime(gram, direct);
  }
  if (corrupt == "delta_sign") {
    for (auto& m : direct.delta) m = -m;
    for (auto& m : direct.delta_prime) m = -m;
    for (auto& m : direct.delta_bar) m = -m;
  }
  say(ctx, "pull-through mapping, L=" + std::to_string(L));
  const BosonQuadratic pulled = quadratic_coeffs_pullthrough(mps, basis, st.model, L, horizon);
  const auto cc = cross_check(direct, pulled, ctol);

  CommandResult res;
  CsvWriter csv(out_path(ctx, "crosscheck.csv"), {"check", "x", "deviation", "tol", "pass"});
  bool ok = true;
  auto row = [&](const std::string& name, int x, double dev, double tol) {
    const bool pass = dev < tol;
    ok = ok && pass;
    csv.row({name, (long long)x, dev, tol, std::string(pass ? "true" : "false")});
  };
  for (std::size_t x = 0; x < cc.eps_dev.size(); ++x)
    row("eps", static_cast<int>(x), cc.eps_dev[x], ctol);
  for (std::size_t x = 0; x < cc.delta_dev.size(); ++x)
    row("delta_prime", static_cast<int>(x + 1), cc.delta_dev[x], ctol);

  if (run_oracle && L >= 2 && basis.modes() > 0) {
    const double dim = std::pow(mps.d(), oN) * mps.D() * mps.D();
    if (dim > 2e6) {
      res.notes.push_back("finite-chain oracle skipped: window too large");
    } else {
      say(ctx, "finite-chain oracle, N=" + std::to_string(oN));
      const auto rep = finite_chain_oracle(mps, basis, st.model, gram, direct, oN, margin);
      row("oracle_M", rep.max_x, rep.M_dev, otol);
      row("oracle_G", rep.max_x, rep.G_dev, otol);
      row("oracle_eps", rep.max_x, rep.eps_dev, otol);
      row("oracle_delta_prime", rep.max_x, rep.dprime_dev, otol);
      row("oracle_gram_inverse", rep.max_x, rep.recon_dev, otol);
    }
  }
  res.outputs.push_back(csv.path());
  res.notes.push_back("model " + model_label(st.model) + ", D=" + std::to_string(D) +
                      ", corrupt=" + corrupt);
  res.notes.push_back(ok ? "crosscheck passed" : "crosscheck FAILED");
  say(ctx, res.notes.back());
  if (!ok) res.exit_code = kExitNumerical;
  finish(ctx, sec, res);
  return res;
}

}  // namespace zpf
