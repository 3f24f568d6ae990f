#include "fastphase/trust_region.hpp"

#include <chrono>
#include <cmath>

namespace fastphase {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void axpy(ComplexGrid& y, double a, const ComplexGrid& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

ComplexGrid apply_inverse(const StackedDiagonal* d, const ComplexGrid& r) {
  if (!d) return r;
  ComplexGrid z(r.shape());
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = Complex(r[i].real() / d->re[i], r[i].imag() / d->im[i]);
  return z;
}

// Positive tau with |s + tau p| = radius.
double to_boundary(const ComplexGrid& s, const ComplexGrid& p, double radius) {
  const double pp = real_dot(p, p);
  const double sp = real_dot(s, p);
  const double ss = real_dot(s, s);
  const double disc = std::max(sp * sp + pp * (radius * radius - ss), 0.0);
  // Stable root of pp tau^2 + 2 sp tau + (ss - r^2) = 0.
  if (sp >= 0) return (radius * radius - ss) / (sp + std::sqrt(disc));
  return (-sp + std::sqrt(disc)) / pp;
}

}  // namespace

SteihaugResult steihaug_cg(const ComplexGrid& grad, const StackedOperator& hvp_fn, double radius,
                           const StackedDiagonal* precond, double tol, int max_iter) {
  if (!(radius > 0)) throw ParameterError("trust radius must be positive");
  SteihaugResult out{ComplexGrid(grad.shape()), false, false, 0};
  ComplexGrid& s = out.step;
  ComplexGrid r = grad;
  const double gnorm = norm2(grad);
  if (!std::isfinite(gnorm)) throw NumericError("non-finite gradient in Steihaug CG");
  if (gnorm == 0) return out;
  const double target = tol * gnorm;

  ComplexGrid z = apply_inverse(precond, r);
  ComplexGrid p = z;
  for (auto& v : p) v = -v;
  double rz = real_dot(r, z);

  for (int j = 0; j < max_iter; ++j) {
    out.iterations = j + 1;
    const ComplexGrid Hp = hvp_fn(p);
    const double kappa = real_dot(p, Hp);
    if (!std::isfinite(kappa)) throw NumericError("non-finite curvature in Steihaug CG");
    if (kappa <= 0) {
      axpy(s, to_boundary(s, p, radius), p);
      out.boundary_hit = true;
      out.neg_curv = true;
      return out;
    }
    const double alpha = rz / kappa;
    ComplexGrid s_next = s;
    axpy(s_next, alpha, p);
    if (norm2(s_next) >= radius) {
      axpy(s, to_boundary(s, p, radius), p);
      out.boundary_hit = true;
      return out;
    }
    s = std::move(s_next);
    axpy(r, alpha, Hp);
    if (norm2(r) <= target) return out;
    z = apply_inverse(precond, r);
    const double rz_next = real_dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = -z[i] + beta * p[i];
  }
  return out;
}

SolveReport minimize(const RealGrid& y, const ComplexGrid& x0, const CostKind& kind, const TrustRegionConfig& cfg) {
  const auto t0 = Clock::now();
  if (!(cfg.eta_accept > 0 && cfg.eta_accept < 0.25)) throw ParameterError("eta_accept must lie in (0, 1/4)");
  if (!(cfg.shrink > 0 && cfg.shrink < 1)) throw ParameterError("shrink must lie in (0, 1)");
  if (!(cfg.grow > 1)) throw ParameterError("grow must exceed 1");

  WirtingerModel model(y, x0.shape(), kind);
  model.set_point(x0);

  SolveReport rep;
  rep.cost_tol = cfg.cost_tol > 0 ? cfg.cost_tol : 1e-26 * sum(y);
  rep.grad_tol = cfg.grad_tol > 0 ? cfg.grad_tol : 1e-15 * norm2(y);
  const double xnorm0 = norm2(x0);
  const double scale = xnorm0 > 0 ? xnorm0 : 1.0;
  const double delta_max = cfg.delta_max > 0 ? cfg.delta_max : 10.0 * scale;
  double delta = std::min(cfg.delta0 > 0 ? cfg.delta0 : 0.1 * scale, delta_max);

  ComplexGrid x = x0;
  double f = model.cost();
  ComplexGrid G = model.gradient();
  for (auto& v : G) v *= 2.0;
  double gnorm = norm2(G);
  if (!std::isfinite(f) || !std::isfinite(gnorm)) {
    rep.x_final = x;
    throw SolverDivergence("non-finite cost at the initial point", rep);
  }
  rep.cost_trace.push_back(f);
  rep.grad_norm_trace.push_back(gnorm);

  auto done = [&] {
    if (f <= rep.cost_tol) {
      rep.stop_reason = "cost below tolerance";
      return true;
    }
    if (gnorm <= rep.grad_tol) {
      rep.stop_reason = "gradient below tolerance";
      return true;
    }
    return false;
  };
  rep.converged = done();

  const StackedOperator H = [&model](const ComplexGrid& u) {
    ComplexGrid h = model.hessian_apply(u);
    for (auto& v : h) v *= 2.0;
    return h;
  };

  while (!rep.converged && rep.iterations < cfg.max_outer) {
    ++rep.iterations;
    std::optional<StackedDiagonal> precond;
    if (cfg.use_preconditioner) {
      StackedDiagonal d = model.diagonal();
      const double mx = std::max(max_value(d.re), max_value(d.im));
      const double floor = kPreconditionerFloor * std::max(mx, 1e-300);
      for (auto& v : d.re) v = std::max(v, floor);
      for (auto& v : d.im) v = std::max(v, floor);
      precond = std::move(d);
    }
    const double tol = cfg.cg_tol_rel > 0 ? cfg.cg_tol_rel : std::min(0.5, std::sqrt(gnorm));
    SteihaugResult cg = steihaug_cg(G, H, delta, precond ? &*precond : nullptr, tol, cfg.cg_max_iter);
    rep.cg_iters_total += cg.iterations;

    const ComplexGrid Hs = H(cg.step);
    const double pred = -(real_dot(G, cg.step) + 0.5 * real_dot(cg.step, Hs));
    ComplexGrid x_new = x;
    axpy(x_new, 1.0, cg.step);
    model.set_point(x_new);
    const double f_new = model.cost();
    if (!std::isfinite(f_new)) {
      rep.x_final = x;
      rep.wall_seconds = seconds_since(t0);
      throw SolverDivergence("cost became non-finite at outer iteration " + std::to_string(rep.iterations), rep);
    }
    const double actual = f - f_new;
    const double rho = pred > 0 ? actual / pred : -1.0;
    const double step_norm = norm2(cg.step);

    if (rho < 0.25) delta = cfg.shrink * std::min(delta, step_norm > 0 ? step_norm : delta);
    else if (rho > 0.75 && cg.boundary_hit) delta = std::min(cfg.grow * delta, delta_max);

    if (rho > cfg.eta_accept && actual >= 0) {
      x = std::move(x_new);
      f = f_new;
      G = model.gradient();
      for (auto& v : G) v *= 2.0;
      gnorm = norm2(G);
      rep.cost_trace.push_back(f);
      rep.grad_norm_trace.push_back(gnorm);
      rep.converged = done();
    } else {
      model.set_point(x);
    }
    rep.radius_trace.push_back(delta);

    if (!rep.converged && delta <= 1e-15 * std::max(norm2(x), 1e-300)) {
      rep.stop_reason = "trust radius collapsed";
      break;
    }
  }
  if (!rep.converged && rep.stop_reason.empty()) rep.stop_reason = "iteration limit reached";
  rep.x_final = std::move(x);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

SolveReport wirtinger_flow(const RealGrid& y, const ComplexGrid& x0, const CostKind& kind,
                           const WirtingerFlowConfig& cfg) {
  const auto t0 = Clock::now();
  double mu = cfg.step_size > 0 ? cfg.step_size : 1.0 / (2.0 * max_value(y));
  WirtingerModel model(y, x0.shape(), kind);
  model.set_point(x0);
  SolveReport rep;
  rep.cost_tol = cfg.cost_tol;
  ComplexGrid x = x0;
  double f = model.cost();
  if (!std::isfinite(f)) {
    rep.x_final = x;
    throw SolverDivergence("non-finite cost at the initial point", rep);
  }
  ComplexGrid g = model.gradient();
  double gnorm = 2.0 * norm2(g);
  rep.cost_trace.push_back(f);
  rep.grad_norm_trace.push_back(gnorm);
  rep.converged = f <= cfg.cost_tol;

  while (!rep.converged && rep.iterations < cfg.max_iter) {
    if (gnorm == 0) {
      rep.stop_reason = "stationary point";
      break;
    }
    ++rep.iterations;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      ComplexGrid x_new = x;
      axpy(x_new, -mu, g);
      model.set_point(x_new);
      const double f_new = model.cost();
      if (std::isfinite(f_new) && f_new <= f) {
        x = std::move(x_new);
        f = f_new;
        accepted = true;
        break;
      }
      mu *= 0.5;
    }
    if (!accepted) {
      model.set_point(x);
      rep.stop_reason = "no descent after step halving";
      break;
    }
    g = model.gradient();
    gnorm = 2.0 * norm2(g);
    rep.cost_trace.push_back(f);
    rep.grad_norm_trace.push_back(gnorm);
    rep.converged = f <= cfg.cost_tol;
  }
  if (rep.converged) rep.stop_reason = "cost below tolerance";
  else if (rep.stop_reason.empty()) rep.stop_reason = "iteration limit reached";
  rep.x_final = std::move(x);
  rep.wall_seconds = seconds_since(t0);
  return rep;
}

}  // namespace fastphase
