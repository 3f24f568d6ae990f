#include "fastphase/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <thread>

#include "fastphase/fft.hpp"
#include "fastphase/rng.hpp"

namespace fastphase {

void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(jobs, count); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

namespace {

// Distinct stream for the noise draw of a row, decorrelated from the object seed.
std::uint64_t noise_seed(std::uint64_t row_seed) { return row_seed * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL; }

ExperimentRow run_noise_row(const NoiseSweepConfig& cfg, std::size_t id, double snr) {
  ExperimentRow row;
  row.instance_id = id;
  row.seed = cfg.seed + id;
  row.snr_db = snr;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    Rng rng(row.seed);
    ComplexGrid x = complex_gaussian(cfg.shape, rng);
    x.at(cfg.impulse_position) = cfg.impulse_magnitude;
    const double energy = norm2(x) * norm2(x);
    RealGrid y = measure(x, cfg.shape.scaled(2));
    y = add_gaussian_noise(y, snr, energy, noise_seed(row.seed));
    FastPhaseResult res = fast_phase_retrieve(y, cfg.shape, cfg.solver);
    row.w = res.w;
    row.iterations = res.report.iterations;
    row.rmse_db = rmse_db(res.x, x);
    const AlignmentResult truth_in_frame = align(x, res.x0);
    row.basin_inside = basin_check(res.x0, truth_in_frame.aligned, y, res.w).inside;
    row.status = res.report.converged                             ? "ok"
                 : res.report.stop_reason == "trust radius collapsed" ? "stalled"
                                                                      : "not_converged";
  } catch (const std::exception& e) {
    row.status = std::string("error: ") + e.what();
    row.rmse_db = 0;
  }
  if (cfg.timing) row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::vector<ExperimentRow> noise_sweep(const NoiseSweepConfig& cfg) {
  if (!cfg.shape.contains(cfg.impulse_position)) throw ParameterError("impulse position outside the object shape");
  std::vector<double> snrs = cfg.snr_db;
  if (cfg.include_noiseless) snrs.push_back(kNoiseless);
  std::vector<ExperimentRow> rows(snrs.size() * cfg.trials);
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t id) { rows[id] = run_noise_row(cfg, id, snrs[id / cfg.trials]); });
  return rows;
}

std::string experiment_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = "instance_id,seed,snr_db,w,basin_inside,iterations,rmse_db,wall_seconds,status\n";
  for (const auto& r : rows) {
    out += std::to_string(r.instance_id) + ',' + std::to_string(r.seed) + ',' + format_double(r.snr_db) + ',' +
           csv_field(to_string(r.w)) + ',' + (r.basin_inside ? "true" : "false") + ',' +
           std::to_string(r.iterations) + ',' + format_double(r.rmse_db) + ',' + format_double(r.wall_seconds) +
           ',' + csv_field(r.status) + '\n';
  }
  return out;
}

std::vector<SnrSummary> summarize_by_snr(const std::vector<ExperimentRow>& rows) {
  std::vector<SnrSummary> out;
  std::map<double, std::vector<const ExperimentRow*>> groups;
  for (const auto& r : rows) groups[r.snr_db].push_back(&r);
  for (const auto& [snr, members] : groups) {
    std::vector<double> vals;
    std::size_t failures = 0;
    for (const auto* r : members) {
      if (r->status.rfind("error", 0) == 0) {
        ++failures;
        continue;
      }
      vals.push_back(r->rmse_db);
    }
    out.push_back({snr, median(vals), members.size(), failures});
  }
  return out;
}

std::vector<WfComparisonRow> wf_comparison(const WfComparisonConfig& cfg) {
  if (cfg.trials < 1) throw ParameterError("trials must be >= 1");
  std::vector<WfComparisonRow> out;
  for (std::size_t side : cfg.sides) {
    const std::size_t d = 2;
    const Shape n(std::vector<std::size_t>(d, side));
    std::vector<char> wf_ok(cfg.trials, 0), fpr_ok(cfg.trials, 0);
    std::vector<double> residual(cfg.trials, 0);
    parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) {
      Rng rng(cfg.seed + t);
      const MultiIndex w = uniform_index(n, rng);
      const ComplexGrid x = generate_schwarz_object({n, w, cfg.dominance_ratio, cfg.seed + t});
      const RealGrid y = measure(x, n.scaled(2));

      ComplexGrid start = complex_gaussian(n, rng);
      const double target = std::sqrt(sum(y));
      const double s = target / std::max(norm2(start), 1e-300);
      for (auto& v : start) v *= s;
      try {
        const SolveReport wf = wirtinger_flow(y, start, CostKind::least_squares(), cfg.wf);
        wf_ok[t] = aligned_relative_error(wf.x_final, x) <= cfg.success_threshold;
      } catch (const NumericError&) {
      }

      try {
        const FastPhaseResult fpr = fast_phase_retrieve(y, n, cfg.solver);
        fpr_ok[t] = aligned_relative_error(fpr.x, x) <= cfg.success_threshold;
        const RealGrid y_hat = measure(fpr.x, n.scaled(2));
        double r = 0;
        for (std::size_t k = 0; k < y.size(); ++k) r = std::max(r, std::abs(y_hat[k] - y[k]));
        residual[t] = r / max_value(y);
      } catch (const NumericError&) {
        residual[t] = std::numeric_limits<double>::infinity();
      }
    });
    WfComparisonRow row;
    row.side = side;
    row.trials = cfg.trials;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      row.wf_successes += wf_ok[t];
      row.fpr_successes += fpr_ok[t];
      row.fpr_max_residual = std::max(row.fpr_max_residual, residual[t]);
    }
    out.push_back(row);
  }
  return out;
}

std::vector<QuadratureRow> quadrature_study(const QuadratureConfig& cfg) {
  const Shape m = cfg.shape.scaled(2);
  std::vector<std::vector<double>> ident(cfg.factors.size(), std::vector<double>(cfg.trials));
  std::vector<std::vector<double>> quad = ident;
  parallel_for(cfg.trials, cfg.jobs, [&](std::size_t t) {
    Rng rng(cfg.seed + t);
    const MultiIndex w = uniform_index(cfg.shape, rng);
    const ComplexGrid x = generate_schwarz_object({cfg.shape, w, cfg.dominance_ratio, cfg.seed + t});
    const RealGrid y = measure(x, m);
    const ComplexGrid reference = schwarz_exp_half(y, w, SchwarzConfig{cfg.reference_factor});
    for (std::size_t f = 0; f < cfg.factors.size(); ++f) {
      ident[f][t] = schwarz_identity_error(x, w, m, SchwarzConfig{cfg.factors[f]});
      quad[f][t] = max_relative_deviation(schwarz_exp_half(y, w, SchwarzConfig{cfg.factors[f]}), reference);
    }
  });
  std::vector<QuadratureRow> out;
  for (std::size_t f = 0; f < cfg.factors.size(); ++f)
    out.push_back({cfg.factors[f], median(ident[f]), median(quad[f])});
  return out;
}

}  // namespace fastphase
