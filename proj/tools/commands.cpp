#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "fastphase/errors.hpp"
#include "fastphase/experiments.hpp"
#include "fastphase/instance.hpp"
#include "fastphase/pipeline.hpp"
#include "fastphase/rng.hpp"
#include "fastphase/schwarz.hpp"
#include "fastphase/tensor_io.hpp"
#include "fastphase/winding.hpp"
#include "fastphase/wirtinger.hpp"
#include "json.hpp"

namespace fastphase::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Sweep configs in JSON: keys are long flag names ("trials", "impulse_magnitude"),
// arrays map to multi-value flags. Keys are scoped to the subcommand path that
// was parsed, since config files are only read by the root app.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::function<std::vector<std::string>()> scope) : scope_(std::move(scope)) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j = json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || opt->get_configurable() == false) continue;
      const std::string& name = opt->get_lnames().front();
      if (name == "help" || name == "config") continue;
      std::vector<std::string> vals = opt->results();
      if (vals.empty() && default_also && !opt->get_default_str().empty()) vals = {opt->get_default_str()};
      if (vals.empty()) continue;
      j[name] = vals.size() == 1 ? json(vals.front()) : json(vals);
    }
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError("config", std::string("invalid JSON config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config", "JSON config must be an object");
    std::vector<CLI::ConfigItem> items;
    const std::vector<std::string> parents = scope_();
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      auto scalar = [](const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
        if (v.is_number_float()) {
          std::ostringstream s;
          s.precision(17);
          s << v.get<double>();
          return s.str();
        }
        throw CLI::ConversionError("config", "unsupported JSON value " + v.dump());
      };
      if (value.is_array())
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(value));
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  std::function<std::vector<std::string>()> scope_;
};

std::uint64_t default_seed() {
  const char* s = std::getenv("FASTPHASE_SEED");
  if (s && *s) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(s, &used);
      if (used == std::string(s).size()) return v;
    } catch (const std::exception&) {
    }
    throw ParameterError(std::string("FASTPHASE_SEED is not an unsigned integer: '") + s + "'");
  }
  return 0;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir + "'");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("write failed for '" + path + "'");
}

json index_json(const MultiIndex& k) { return json(k); }

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

const std::map<std::string, CostVariant> kCosts{
    {"normalized", CostVariant::kNormalized}, {"reg", CostVariant::kRegularized}, {"ls", CostVariant::kLeastSquares}};
const std::map<std::string, WindingMethod> kWindings{{"mirrored", WindingMethod::kMirroredBox},
                                                     {"box", WindingMethod::kBoxConvolution}};

// Solver flags shared by solve and the sweeps that run the pipeline.
struct SolverFlags {
  std::string cost = "normalized";
  double lambda = 1.0;
  std::string winding = "mirrored";
  std::size_t schwarz_factor = 1;
  double epsilon = 0;
  double grad_tol = 0;
  int max_iter = 500;
  bool no_precondition = false;
  int restarts = 4;

  void add(CLI::App* app) {
    app->add_option("--cost", cost, "Cost function")->check(CLI::IsMember({"normalized", "reg", "ls"}));
    app->add_option("--lambda", lambda, "Anchor regularization weight (reg and normalized costs)")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--winding", winding, "Winding estimator (mirrored: mirrored lag boxes; box: plain box sum)")
        ->check(CLI::IsMember({"mirrored", "box"}));
    app->add_option("--schwarz-factor", schwarz_factor, "Oversampling factor for the Schwarz transform")
        ->check(CLI::PositiveNumber);
    app->add_option("--epsilon", epsilon, "Absolute cost tolerance (0: 1e-26 * sum(y))")->check(CLI::NonNegativeNumber);
    app->add_option("--grad-tol", grad_tol, "Gradient-norm tolerance (0: 1e-15 * |y|_2)")->check(CLI::NonNegativeNumber);
    app->add_option("--max-iter", max_iter, "Maximum trust-region iterations")->check(CLI::PositiveNumber);
    app->add_flag("--no-precondition", no_precondition, "Disable the Jacobi preconditioner");
    app->add_option("--restarts", restarts, "Perturbed restarts per candidate when the winding is ambiguous")
        ->check(CLI::NonNegativeNumber);
  }

  FastPhaseOptions options() const {
    FastPhaseOptions o;
    o.cost = kCosts.at(cost);
    o.lambda = lambda;
    o.winding = kWindings.at(winding);
    o.schwarz.oversample_factor = schwarz_factor;
    o.trust_region.cost_tol = epsilon;
    o.trust_region.grad_tol = grad_tol;
    o.trust_region.max_outer = max_iter;
    o.trust_region.use_preconditioner = !no_precondition;
    o.restarts = restarts;
    return o;
  }
};

json report_json(const SolveReport& r, bool timing) {
  json j;
  j["converged"] = r.converged;
  j["stop_reason"] = r.stop_reason;
  j["iterations"] = r.iterations;
  j["cg_iterations"] = r.cg_iters_total;
  j["cost_tol"] = r.cost_tol;
  j["grad_tol"] = r.grad_tol;
  j["final_cost"] = r.cost_trace.empty() ? json(nullptr) : json(r.cost_trace.back());
  j["cost_trace"] = r.cost_trace;
  j["grad_norm_trace"] = r.grad_norm_trace;
  j["radius_trace"] = r.radius_trace;
  j["warnings"] = r.warnings;
  j["wall_seconds"] = timing ? r.wall_seconds : 0.0;
  return j;
}

json winding_json(const WindingResult& r) {
  json j;
  j["w"] = index_json(r.w);
  j["tie"] = r.tie;
  json tied = json::array();
  for (const auto& k : r.tied) tied.push_back(index_json(k));
  j["tied"] = tied;
  return j;
}

Instance load_instance_checked(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("instance directory '" + dir + "' does not exist");
  return load_instance(dir);
}

// ---- gen -------------------------------------------------------------------

struct GenFlags {
  std::string shape;
  std::string w;
  double rho = 2.0;
  std::uint64_t seed = 0;
  std::optional<double> snr;
  std::size_t oversample = 2;
  std::string out;
};

int cmd_gen(const GenFlags& f, std::ostream& out) {
  const Shape n = Shape::parse(f.shape);
  if (f.rho < 2) throw ParameterError("--rho must satisfy rho >= 2 (got " + std::to_string(f.rho) + ")");
  if (f.oversample < 2) throw ParameterError("--oversample must be >= 2");
  MultiIndex w;
  if (f.w.empty()) {
    Rng rng(f.seed);
    w = uniform_index(n, rng);
  } else {
    w = parse_multi_index(f.w);
    if (!n.contains(w)) throw ParameterError("--w (" + f.w + ") lies outside shape " + n.to_string());
  }
  Instance inst;
  inst.support = n;
  inst.seed = f.seed;
  inst.rho = f.rho;
  inst.w = w;
  ComplexGrid x = generate_schwarz_object({n, w, f.rho, f.seed});
  inst.y = measure(x, n.scaled(f.oversample));
  if (f.snr && std::isfinite(*f.snr)) {
    const double energy = norm2(x) * norm2(x);
    inst.snr_db = *f.snr;
    inst.noise_sigma = std::sqrt(noise_variance(*f.snr, energy));
    inst.y = add_gaussian_noise(inst.y, *f.snr, energy, f.seed ^ 0x5DEECE66DULL);
  }
  inst.truth = std::move(x);
  ensure_directory(f.out);
  save_instance(f.out, inst);
  out << "wrote instance " << n.to_string() << " w=(" << to_string(w) << ") to " << f.out << "\n";
  return kExitOk;
}

// ---- solve -----------------------------------------------------------------

struct SolveFlags {
  std::string instance;
  std::string out;
  std::string w;
  bool timing = false;
  SolverFlags solver;
};

int cmd_solve(const SolveFlags& f, std::ostream& out) {
  FastPhaseOptions opts = f.solver.options();
  const Instance inst = load_instance_checked(f.instance);
  if (!f.w.empty()) {
    opts.w = parse_multi_index(f.w);
    if (!inst.support.contains(*opts.w)) throw ParameterError("--w (" + f.w + ") lies outside the support");
  }
  const std::string out_dir = f.out.empty() ? f.instance : f.out;
  ensure_directory(out_dir);

  const FastPhaseResult res = fast_phase_retrieve(inst.y, inst.support, opts);
  json j;
  j["support"] = inst.support.to_string();
  j["measurement"] = inst.y.shape().to_string();
  j["cost"] = f.solver.cost;
  j["w"] = index_json(res.w);
  if (res.winding) j["winding"] = winding_json(*res.winding);
  j["attempts"] = res.attempts;
  j["solver"] = report_json(res.report, f.timing);
  if (inst.truth) {
    const AlignmentResult in_frame = align(*inst.truth, res.x0);
    j["basin_inside"] = basin_check(res.x0, in_frame.aligned, inst.y, res.w).inside;
    j["relative_error"] = aligned_relative_error(res.x, *inst.truth);
    j["rmse_db"] = rmse_db(res.x, *inst.truth);
  }
  write_tensor((fs::path(out_dir) / "xhat.fpt").string(), res.x);
  write_text((fs::path(out_dir) / "report.json").string(), j.dump(2) + "\n");

  out << (res.report.converged ? "converged" : "not converged") << " (" << res.report.stop_reason << ") after "
      << res.report.iterations << " iterations, w=(" << to_string(res.w) << ")";
  if (inst.truth) out << ", rmse_db=" << j["rmse_db"].get<double>();
  out << "\n";
  return res.report.converged ? kExitOk : kExitNotConverged;
}

// ---- winding / schwarz-init -----------------------------------------------

struct WindingFlags {
  std::string instance;
  std::string method = "mirrored";
};

int cmd_winding(const WindingFlags& f, std::ostream& out) {
  const Instance inst = load_instance_checked(f.instance);
  const WindingResult r = winding_from_measurement(inst.y, inst.support, kWindings.at(f.method));
  json j = winding_json(r);
  j["reflected"] = index_json(reflected_index(r.w, inst.support));
  if (inst.w) j["planted"] = index_json(*inst.w);
  out << j.dump(2) << "\n";
  return kExitOk;
}

struct SchwarzInitFlags {
  std::string instance;
  std::string w;
  std::size_t factor = 1;
  std::string out;
  std::string method = "mirrored";
};

int cmd_schwarz_init(const SchwarzInitFlags& f, std::ostream& out) {
  const Instance inst = load_instance_checked(f.instance);
  MultiIndex w;
  if (f.w.empty()) {
    w = winding_from_measurement(inst.y, inst.support, kWindings.at(f.method)).w;
  } else {
    w = parse_multi_index(f.w);
    if (!inst.support.contains(w)) throw ParameterError("--w (" + f.w + ") lies outside the support");
  }
  const ComplexGrid x0 = schwarz_init(inst.y, w, inst.support, SchwarzConfig{f.factor});
  const std::string path = f.out.empty() ? (fs::path(f.instance) / "x0.fpt").string() : f.out;
  write_tensor(path, x0);
  json j;
  j["w"] = index_json(w);
  j["path"] = path;
  if (inst.truth) {
    j["relative_error"] = aligned_relative_error(x0, *inst.truth);
    const AlignmentResult in_frame = align(*inst.truth, x0);
    j["basin_inside"] = basin_check(x0, in_frame.aligned, inst.y, w).inside;
  }
  out << j.dump(2) << "\n";
  return kExitOk;
}

// ---- sweeps ----------------------------------------------------------------

struct SweepCommon {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool timing = false;
  std::string out = ".";

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "Base seed (default from FASTPHASE_SEED, else 0)");
    app->add_option("--jobs", jobs, "Worker threads; results do not depend on this")->check(CLI::PositiveNumber);
    app->add_flag("--timing", timing, "Record wall-clock seconds (makes CSV output run-dependent)");
    app->add_option("--out", out, "Output directory");
  }
};

struct NoiseFlags {
  SweepCommon common;
  std::string shape = "32x32";
  std::string impulse_position = "0,0";
  double impulse_magnitude = 1024.0;
  std::vector<double> snr{10, 20, 30, 40, 50, 60};
  bool noiseless = true;
  std::size_t trials = 25;
  SolverFlags solver;
};

int cmd_sweep_noise(const NoiseFlags& f, std::ostream& out) {
  NoiseSweepConfig cfg;
  cfg.shape = Shape::parse(f.shape);
  cfg.impulse_position = parse_multi_index(f.impulse_position);
  if (!cfg.shape.contains(cfg.impulse_position)) throw ParameterError("--impulse-position lies outside --shape");
  cfg.impulse_magnitude = f.impulse_magnitude;
  cfg.snr_db = f.snr;
  cfg.include_noiseless = f.noiseless;
  cfg.trials = f.trials;
  cfg.seed = f.common.seed;
  cfg.jobs = f.common.jobs;
  cfg.timing = f.common.timing;
  cfg.solver = f.solver.options();
  ensure_directory(f.common.out);

  const auto rows = noise_sweep(cfg);
  write_text((fs::path(f.common.out) / "noise.csv").string(), experiment_csv(rows));
  const auto summary = summarize_by_snr(rows);
  json s;
  s["shape"] = cfg.shape.to_string();
  s["trials"] = cfg.trials;
  s["cost"] = f.solver.cost;
  json per = json::array();
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& r : summary) {
    per.push_back({{"snr_db", finite_or_string(r.snr_db)},
                   {"median_rmse_db", r.median_rmse_db},
                   {"rows", r.rows},
                   {"failures", r.failures}});
    if (std::isfinite(r.snr_db)) {
      monotone = monotone && r.median_rmse_db < prev;
      prev = r.median_rmse_db;
    }
  }
  s["by_snr"] = per;
  s["median_strictly_decreasing"] = monotone;
  write_text((fs::path(f.common.out) / "summary.json").string(), s.dump(2) + "\n");
  for (const auto& r : summary)
    out << "snr " << (std::isfinite(r.snr_db) ? std::to_string(r.snr_db) : "inf") << ": median rmse_db "
        << r.median_rmse_db << " over " << r.rows << " rows\n";
  return kExitOk;
}

struct QuadratureFlags {
  SweepCommon common;
  std::string shape = "8x8";
  std::vector<std::size_t> factors{1, 2, 4, 8};
  std::size_t trials = 50;
  double rho = 2.0;
  std::size_t reference_factor = 64;
};

int cmd_sweep_quadrature(const QuadratureFlags& f, std::ostream& out) {
  if (f.rho < 2) throw ParameterError("--rho must satisfy rho >= 2");
  QuadratureConfig cfg;
  cfg.shape = Shape::parse(f.shape);
  cfg.factors = f.factors;
  cfg.trials = f.trials;
  cfg.seed = f.common.seed;
  cfg.dominance_ratio = f.rho;
  cfg.reference_factor = f.reference_factor;
  cfg.jobs = f.common.jobs;
  for (std::size_t k : cfg.factors)
    if (k >= cfg.reference_factor) throw ParameterError("--factors must stay below --reference-factor");
  ensure_directory(f.common.out);

  const auto rows = quadrature_study(cfg);
  std::string csv = "factor,quadrature_error,identity_error\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g\n", r.factor, r.quadrature_error, r.identity_error);
    csv += buf;
  }
  write_text((fs::path(f.common.out) / "quadrature.csv").string(), csv);
  json s;
  s["shape"] = cfg.shape.to_string();
  s["trials"] = cfg.trials;
  s["reference_factor"] = cfg.reference_factor;
  json per = json::array();
  bool decreasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    per.push_back({{"factor", rows[i].factor},
                   {"median_quadrature_error", rows[i].quadrature_error},
                   {"median_identity_error", rows[i].identity_error}});
    if (i > 0) decreasing = decreasing && rows[i].quadrature_error < rows[i - 1].quadrature_error;
  }
  s["by_factor"] = per;
  s["quadrature_error_strictly_decreasing"] = decreasing;
  write_text((fs::path(f.common.out) / "summary.json").string(), s.dump(2) + "\n");
  for (const auto& r : rows)
    out << "factor " << r.factor << ": quadrature " << r.quadrature_error << ", identity " << r.identity_error << "\n";
  return kExitOk;
}

struct WfFlags {
  SweepCommon common;
  std::vector<std::size_t> sides{2, 3, 4, 5};
  std::size_t trials = 1000;
  double rho = 2.0;
  double threshold = 1e-3;
  int wf_max_iter = 5000;
  SolverFlags solver;
};

int cmd_sweep_wf(const WfFlags& f, std::ostream& out) {
  if (f.rho < 2) throw ParameterError("--rho must satisfy rho >= 2");
  WfComparisonConfig cfg;
  cfg.sides = f.sides;
  cfg.trials = f.trials;
  cfg.seed = f.common.seed;
  cfg.jobs = f.common.jobs;
  cfg.dominance_ratio = f.rho;
  cfg.success_threshold = f.threshold;
  cfg.wf.max_iter = f.wf_max_iter;
  cfg.solver = f.solver.options();
  ensure_directory(f.common.out);

  const auto rows = wf_comparison(cfg);
  std::string csv = "side,trials,wf_successes,wf_rate,fpr_successes,fpr_rate,fpr_max_residual\n";
  char buf[256];
  json per = json::array();
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.10g,%zu,%.10g,%.10g\n", r.side, r.trials, r.wf_successes,
                  r.wf_rate(), r.fpr_successes, r.fpr_rate(), r.fpr_max_residual);
    csv += buf;
    per.push_back({{"side", r.side},
                   {"trials", r.trials},
                   {"wf_success_rate", r.wf_rate()},
                   {"fpr_success_rate", r.fpr_rate()},
                   {"fpr_max_residual", finite_or_string(r.fpr_max_residual)}});
    out << "side " << r.side << ": WF " << r.wf_successes << "/" << r.trials << ", FPR " << r.fpr_successes << "/"
        << r.trials << "\n";
  }
  write_text((fs::path(f.common.out) / "wf.csv").string(), csv);
  json s;
  s["threshold"] = cfg.success_threshold;
  s["by_side"] = per;
  write_text((fs::path(f.common.out) / "summary.json").string(), s.dump(2) + "\n");
  return kExitOk;
}

struct ConditionFlags {
  SweepCommon common;
  std::string shape = "4x4";
  std::vector<double> ratios{2, 10, 1e2, 1e4, 1e6};
  std::string cost = "normalized";
};

int cmd_sweep_condition(const ConditionFlags& f, std::ostream& out) {
  const Shape n = Shape::parse(f.shape);
  const CostVariant v = kCosts.at(f.cost);
  ensure_directory(f.common.out);
  const auto plain = condition_study(f.ratios, n, v, false, f.common.seed);
  const auto pre = condition_study(f.ratios, n, v, true, f.common.seed);
  std::string csv = "ratio,unpreconditioned,preconditioned\n";
  char buf[128];
  json per = json::array();
  bool dominated = true;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g\n", plain[i].ratio, plain[i].condition, pre[i].condition);
    csv += buf;
    per.push_back({{"ratio", plain[i].ratio},
                   {"unpreconditioned", plain[i].condition},
                   {"preconditioned", pre[i].condition}});
    dominated = dominated && pre[i].condition <= plain[i].condition;
    out << "ratio " << plain[i].ratio << ": " << plain[i].condition << " -> " << pre[i].condition << "\n";
  }
  write_text((fs::path(f.common.out) / "condition.csv").string(), csv);
  json s;
  s["shape"] = n.to_string();
  s["cost"] = f.cost;
  s["by_ratio"] = per;
  s["preconditioned_never_worse"] = dominated;
  write_text((fs::path(f.common.out) / "summary.json").string(), s.dump(2) + "\n");
  return kExitOk;
}

int error_exit(std::ostream& err, int code, const std::string& what) {
  err << "fastphase: " << what << "\n";
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fast phase retrieval: generation, solving, and experiment sweeps", "fastphase"};
  app.require_subcommand(1);
  app.get_formatter()->column_width(40);
  app.option_defaults()->always_capture_default();

  std::uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const ParameterError& e) {
    return error_exit(err, kExitUsage, e.what());
  }
  auto add_seed = [&](CLI::App* sub, std::uint64_t& target) {
    target = seed;
    sub->add_option("--seed", target, "Seed (default from FASTPHASE_SEED, else 0)");
  };

  GenFlags gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a Schwarz-object instance directory (y.fpt, truth.fpt, meta.json)");
  gen_cmd->add_option("--shape", gen.shape, "Support shape, e.g. 8x8")->required();
  gen_cmd->add_option("--w", gen.w, "Dominant index, e.g. 1,1 (default: uniform from the seed)");
  gen_cmd->add_option("--rho", gen.rho, "Dominance ratio, rho >= 2");
  add_seed(gen_cmd, gen.seed);
  gen_cmd->add_option("--snr", gen.snr, "Additive Gaussian noise SNR in dB (default: noiseless)");
  gen_cmd->add_option("--oversample", gen.oversample, "Measurement oversampling factor per axis");
  gen_cmd->add_option("--out", gen.out, "Instance directory")->required();

  SolveFlags solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run fast phase retrieval on an instance directory");
  solve_cmd->add_option("--instance", solve.instance, "Instance directory")->required();
  solve_cmd->add_option("--out", solve.out, "Output directory (default: the instance directory)");
  solve_cmd->add_option("--w", solve.w, "Skip winding estimation and use this index");
  solve_cmd->add_flag("--timing", solve.timing, "Record wall-clock seconds in report.json");
  solve.solver.add(solve_cmd);

  WindingFlags winding;
  auto* winding_cmd = app.add_subcommand("winding", "Estimate the winding index of an instance");
  winding_cmd->add_option("--instance", winding.instance, "Instance directory")->required();
  winding_cmd->add_option("--method", winding.method, "Estimator")->check(CLI::IsMember({"mirrored", "box"}));

  SchwarzInitFlags sinit;
  auto* sinit_cmd = app.add_subcommand("schwarz-init", "Compute the Schwarz-transform initial guess");
  sinit_cmd->add_option("--instance", sinit.instance, "Instance directory")->required();
  sinit_cmd->add_option("--w", sinit.w, "Winding index (default: estimated)");
  sinit_cmd->add_option("--factor", sinit.factor, "Schwarz-transform oversampling factor")->check(CLI::PositiveNumber);
  sinit_cmd->add_option("--method", sinit.method, "Winding estimator when --w is absent")
      ->check(CLI::IsMember({"mirrored", "box"}));
  sinit_cmd->add_option("--out", sinit.out, "Output tensor path (default: <instance>/x0.fpt)");

  auto* sweep = app.add_subcommand("sweep", "Experiment sweeps writing CSV and summary.json");
  sweep->require_subcommand(1);
  sweep->fallthrough();
  auto configurable = [&](CLI::App* sub) {
    sub->fallthrough();
    sub->footer("Flags may also come from --config FILE.json: an object keyed by long flag name\n"
                "(dashes or underscores), arrays for lists. Explicit flags take precedence.");
  };
  app.config_formatter(std::make_shared<JsonConfig>([&app] {
    std::vector<std::string> path;
    const CLI::App* cur = &app;
    while (true) {
      const auto subs = cur->get_subcommands();
      if (subs.empty()) break;
      cur = subs.front();
      path.push_back(cur->get_name());
    }
    return path;
  }));
  app.set_config("--config", "", "JSON config for sweep subcommands");
  app.allow_config_extras(CLI::config_extras_mode::error);

  NoiseFlags noise;
  auto* noise_cmd = sweep->add_subcommand("noise", "RMSE versus SNR for objects with a bright impulse");
  configurable(noise_cmd);
  noise.common.add(noise_cmd);
  noise.common.seed = seed;
  noise.solver.cost = "reg";
  noise_cmd->add_option("--shape", noise.shape, "Object shape");
  noise_cmd->add_option("--impulse-position", noise.impulse_position, "Impulse index");
  noise_cmd->add_option("--impulse-magnitude", noise.impulse_magnitude, "Impulse brightness");
  noise_cmd->add_option("--snr", noise.snr, "SNR list in dB")->delimiter(',');
  noise_cmd->add_flag("--noiseless,!--no-noiseless", noise.noiseless, "Append noiseless control rows");
  noise_cmd->add_option("--trials", noise.trials, "Trials per SNR")->check(CLI::PositiveNumber);
  noise.solver.add(noise_cmd);

  QuadratureFlags quad;
  auto* quad_cmd = sweep->add_subcommand("quadrature", "Schwarz-transform error versus oversampling factor");
  configurable(quad_cmd);
  quad.common.add(quad_cmd);
  quad.common.seed = seed;
  quad_cmd->add_option("--shape", quad.shape, "Object shape");
  quad_cmd->add_option("--factors", quad.factors, "Oversampling factors")->delimiter(',');
  quad_cmd->add_option("--trials", quad.trials, "Objects per factor")->check(CLI::PositiveNumber);
  quad_cmd->add_option("--rho", quad.rho, "Dominance ratio, rho >= 2");
  quad_cmd->add_option("--reference-factor", quad.reference_factor, "Factor of the reference transform");

  WfFlags wf;
  auto* wf_cmd = sweep->add_subcommand("wf", "Wirtinger Flow from random starts versus fast phase retrieval");
  configurable(wf_cmd);
  wf.common.add(wf_cmd);
  wf.common.seed = seed;
  wf_cmd->add_option("--sides", wf.sides, "Square side lengths")->delimiter(',');
  wf_cmd->add_option("--trials", wf.trials, "Instances per side")->check(CLI::PositiveNumber);
  wf_cmd->add_option("--rho", wf.rho, "Dominance ratio, rho >= 2");
  wf_cmd->add_option("--threshold", wf.threshold, "Success threshold on aligned relative error");
  wf_cmd->add_option("--wf-max-iter", wf.wf_max_iter, "Wirtinger Flow iteration cap")->check(CLI::PositiveNumber);
  wf.solver.add(wf_cmd);

  ConditionFlags cond;
  auto* cond_cmd = sweep->add_subcommand("condition", "Hessian condition number versus first-entry ratio");
  configurable(cond_cmd);
  cond.common.add(cond_cmd);
  cond.common.seed = seed;
  cond_cmd->add_option("--shape", cond.shape, "Object shape (dense Hessian, N <= 256)");
  cond_cmd->add_option("--ratios", cond.ratios, "First-entry dominance ratios")->delimiter(',');
  cond_cmd->add_option("--cost", cond.cost, "Cost function")->check(CLI::IsMember({"normalized", "reg", "ls"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::FileError& e) {
    return error_exit(err, kExitIo, e.what());
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen(gen, out);
    if (*solve_cmd) return cmd_solve(solve, out);
    if (*winding_cmd) return cmd_winding(winding, out);
    if (*sinit_cmd) return cmd_schwarz_init(sinit, out);
    if (*noise_cmd) return cmd_sweep_noise(noise, out);
    if (*quad_cmd) return cmd_sweep_quadrature(quad, out);
    if (*wf_cmd) return cmd_sweep_wf(wf, out);
    if (*cond_cmd) return cmd_sweep_condition(cond, out);
  } catch (const ParameterError& e) {
    return error_exit(err, kExitUsage, e.what());
  } catch (const DimensionError& e) {
    return error_exit(err, kExitUsage, e.what());
  } catch (const FormatError& e) {
    return error_exit(err, kExitIo, e.what());
  } catch (const IoError& e) {
    return error_exit(err, kExitIo, e.what());
  } catch (const DomainError& e) {
    return error_exit(err, kExitIo, e.what());
  } catch (const NumericError& e) {
    return error_exit(err, kExitNotConverged, e.what());
  } catch (const std::exception& e) {
    return error_exit(err, kExitInternal, e.what());
  }
  return error_exit(err, kExitUsage, "no command given");
}

}  // namespace fastphase::cli
