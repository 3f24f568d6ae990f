#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fastphase/tensor.hpp"
#include "fastphase/wirtinger.hpp"

namespace fastphase {

// Non-positive values select the data-dependent defaults noted per field.
struct TrustRegionConfig {
  double delta0 = 0;        // 0.1 * |x0|
  double delta_max = 0;     // 10 * |x0|
  double eta_accept = 0.1;
  double shrink = 0.25;
  double grow = 2.0;
  double cg_tol_rel = 0;    // min(0.5, sqrt(|g|)), inexact-Newton forcing
  int cg_max_iter = 250;
  double grad_tol = 0;      // 1e-15 * |y|_2
  double cost_tol = 0;      // 1e-26 * sum(y)
  int max_outer = 500;
  bool use_preconditioner = true;
};

struct SolveReport {
  ComplexGrid x_final;
  std::vector<double> cost_trace;       // initial point then every accepted step
  std::vector<double> grad_norm_trace;  // stacked real gradient norm, same indexing
  std::vector<double> radius_trace;     // radius after every outer iteration
  int iterations = 0;
  bool converged = false;
  int cg_iters_total = 0;
  double wall_seconds = 0;
  std::string stop_reason;
  double cost_tol = 0;
  double grad_tol = 0;
  std::vector<std::string> warnings;
};

class SolverDivergence : public NumericError {
 public:
  SolverDivergence(const std::string& what, SolveReport report) : NumericError(what), report_(std::move(report)) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

struct SteihaugResult {
  ComplexGrid step;
  bool boundary_hit = false;
  bool neg_curv = false;
  int iterations = 0;
};

using StackedOperator = std::function<ComplexGrid(const ComplexGrid&)>;

// Approximately solves H s = -g inside |s| <= radius, where g and H act on the
// real-imaginary stacked vector held as a complex grid. tol is relative to |g|.
SteihaugResult steihaug_cg(const ComplexGrid& grad, const StackedOperator& hvp_fn, double radius,
                           const StackedDiagonal* precond, double tol, int max_iter);

SolveReport minimize(const RealGrid& y, const ComplexGrid& x0, const CostKind& kind,
                     const TrustRegionConfig& cfg = {});

struct WirtingerFlowConfig {
  double step_size = 0;  // 1 / (2 max y)
  int max_iter = 5000;
  double cost_tol = 1e-6;
  int max_halvings = 60;
};

// x <- x - mu * df/dx̄ with halving on cost increase.
SolveReport wirtinger_flow(const RealGrid& y, const ComplexGrid& x0, const CostKind& kind,
                           const WirtingerFlowConfig& cfg = {});

}  // namespace fastphase
