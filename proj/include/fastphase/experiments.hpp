#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fastphase/pipeline.hpp"

namespace fastphase {

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Work is claimed
// dynamically; results must be written to per-index slots.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

inline constexpr double kNoiseless = std::numeric_limits<double>::infinity();

struct ExperimentRow {
  std::size_t instance_id = 0;
  std::uint64_t seed = 0;
  double snr_db = kNoiseless;
  MultiIndex w;
  bool basin_inside = false;
  int iterations = 0;
  double rmse_db = 0;
  double wall_seconds = 0;
  std::string status;  // ok | stalled | not_converged | error: <message>
};

struct NoiseSweepConfig {
  Shape shape{32, 32};
  MultiIndex impulse_position{0, 0};
  double impulse_magnitude = 1024.0;
  std::vector<double> snr_db{10, 20, 30, 40, 50, 60};
  bool include_noiseless = true;
  std::size_t trials = 25;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool timing = false;
  // The normalized cost weights residuals by 1/y, which blows up on
  // noise-clamped samples; the regularized cost is robust there.
  FastPhaseOptions solver = [] {
    FastPhaseOptions o;
    o.cost = CostVariant::kRegularized;
    return o;
  }();
};

// Rows are ordered SNR-major (noiseless control last); row i uses seed + i.
std::vector<ExperimentRow> noise_sweep(const NoiseSweepConfig& cfg);

std::string experiment_csv(const std::vector<ExperimentRow>& rows);

struct SnrSummary {
  double snr_db;
  double median_rmse_db;
  std::size_t rows;
  std::size_t failures;
};
std::vector<SnrSummary> summarize_by_snr(const std::vector<ExperimentRow>& rows);

double median(std::vector<double> v);

struct WfComparisonConfig {
  std::vector<std::size_t> sides{2, 3, 4, 5};
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  double dominance_ratio = 2.0;
  double success_threshold = 1e-3;
  WirtingerFlowConfig wf;
  FastPhaseOptions solver;
};

struct WfComparisonRow {
  std::size_t side = 0;
  std::size_t trials = 0;
  std::size_t wf_successes = 0;
  std::size_t fpr_successes = 0;
  double wf_rate() const { return trials ? static_cast<double>(wf_successes) / trials : 0; }
  double fpr_rate() const { return trials ? static_cast<double>(fpr_successes) / trials : 0; }
  // Largest |F x|^2 - y residual relative to max y among FPR solutions.
  double fpr_max_residual = 0;
};

// Trial t of side s: Schwarz object (rho, uniform w) from seed + t, one
// random complex-Gaussian WF start (norm matched to sqrt(sum y)), one FPR solve.
std::vector<WfComparisonRow> wf_comparison(const WfComparisonConfig& cfg);

struct QuadratureRow {
  std::size_t factor = 1;
  double identity_error = 0;    // median vs the X + X^dagger identity
  double quadrature_error = 0;  // median vs the reference-factor transform
};

struct QuadratureConfig {
  Shape shape{8, 8};
  std::vector<std::size_t> factors{1, 2, 4, 8};
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  double dominance_ratio = 2.0;
  std::size_t reference_factor = 64;
  std::size_t jobs = 1;
};

std::vector<QuadratureRow> quadrature_study(const QuadratureConfig& cfg);

}  // namespace fastphase
