#include "fastphase/pipeline.hpp"

#include <cmath>
#include <cstdint>
#include <optional>

#include "fastphase/fft.hpp"
#include "fastphase/rng.hpp"

namespace fastphase {

bool winding_is_ambiguous(const MultiIndex& w, const Shape& support, const WindingResult* winding) {
  if (reflected_index(w, support) == w) return true;
  return winding != nullptr && !tie_is_reflection_pair(*winding, support);
}

namespace {

double final_cost(const SolveReport& r) { return r.cost_trace.empty() ? INFINITY : r.cost_trace.back(); }

bool solved(const SolveReport& r) { return final_cost(r) <= r.cost_tol; }

// Cost-independent ranking of attempts: relative intensity misfit.
double misfit(const RealGrid& y, const ComplexGrid& x) {
  const RealGrid y_hat = measure(x, y.shape());
  double num = 0, den = 0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    num += (y_hat[k] - y[k]) * (y_hat[k] - y[k]);
    den += y[k] * y[k];
  }
  return std::sqrt(num / den);
}

ComplexGrid perturbed_start(const ComplexGrid& x0, const MultiIndex& w, double scale, std::uint64_t seed) {
  const Shape& n = x0.shape();
  const std::size_t anchor = n.flat(w);
  double off = 0;
  for (std::size_t i = 0; i < x0.size(); ++i)
    if (i != anchor) off += std::norm(x0[i]);
  Rng rng(seed);
  ComplexGrid p = complex_gaussian(n, rng);
  const double pn = norm2(p);
  ComplexGrid out = x0;
  if (pn == 0) return out;
  const double k = scale * std::sqrt(off) / pn;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += k * p[i];
  return out;
}

}  // namespace

FastPhaseResult fast_phase_retrieve(const RealGrid& y, const Shape& support, const FastPhaseOptions& opts) {
  if (!y.shape().dominates(support.scaled(2)))
    throw DimensionError("measurement shape " + y.shape().to_string() + " is undersampled for support " +
                         support.to_string());
  for (double v : y)
    if (!(v > 0)) throw DomainError("measurement must be strictly positive");
  if (opts.restarts < 0 || opts.fallback_candidates < 0)
    throw ParameterError("restarts and fallback_candidates must be nonnegative");

  FastPhaseResult res;
  std::vector<std::string> warnings;
  std::vector<MultiIndex> candidates;
  if (opts.w) {
    if (!support.contains(*opts.w)) throw ParameterError("w = (" + to_string(*opts.w) + ") outside support");
    candidates.push_back(*opts.w);
  } else {
    res.winding = winding_from_measurement(y, support, opts.winding);
    candidates.push_back(res.winding->w);
    if (!tie_is_reflection_pair(*res.winding, support)) {
      warnings.push_back("winding estimate tied across " + std::to_string(res.winding->tied.size()) +
                         " indices");
      for (const auto& t : res.winding->tied)
        if (t != res.winding->w) candidates.push_back(t);
    }
  }
  const bool ambiguous =
      winding_is_ambiguous(candidates.front(), support, res.winding ? &*res.winding : nullptr);
  if (!ambiguous) candidates.resize(1);

  bool have = false;
  double best_misfit = 0;
  res.attempts = 0;
  auto attempt = [&](const MultiIndex& w, const ComplexGrid& x0, CostVariant variant) {
    const bool ls = variant == CostVariant::kLeastSquares;
    const CostKind kind{variant, ls ? 0.0 : opts.lambda, ls ? MultiIndex{} : w};
    SolveReport rep = minimize(y, x0, kind, opts.trust_region);
    ++res.attempts;
    const bool ok = solved(rep);
    const double m = misfit(y, rep.x_final);
    if (!have || ok || m < best_misfit) {
      have = true;
      best_misfit = m;
      res.w = w;
      res.x0 = x0;
      res.report = std::move(rep);
    }
    return ok;
  };
  auto try_index = [&](const MultiIndex& w) {
    const ComplexGrid base = schwarz_init(y, w, support, opts.schwarz);
    if (attempt(w, base, opts.cost) || !ambiguous) return true;
    if (opts.cost != CostVariant::kLeastSquares && attempt(w, base, CostVariant::kLeastSquares)) return true;
    for (int s = 1; s <= opts.restarts; ++s)
      if (attempt(w, perturbed_start(base, w, opts.restart_scale, static_cast<std::uint64_t>(s)), opts.cost))
        return true;
    return false;
  };

  bool done = false;
  for (const auto& w : candidates)
    if ((done = try_index(w))) break;
  if (!done && ambiguous && res.winding && opts.fallback_candidates > 0) {
    // Remaining reflection classes by descending winding score.
    std::vector<std::size_t> order(support.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const RealGrid& score = res.winding->score_grid;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    int used = 0;
    for (std::size_t flat : order) {
      if (used >= opts.fallback_candidates) break;
      const MultiIndex k = support.unravel(flat);
      bool seen = false;
      for (const auto& c : candidates) seen = seen || same_up_to_reflection(c, k, support);
      if (seen) continue;
      candidates.push_back(k);
      ++used;
      if (try_index(k)) break;
    }
  }
  if (res.attempts > 1)
    warnings.push_back("ambiguous winding; kept best of " + std::to_string(res.attempts) + " starts at (" +
                       to_string(res.w) + ")");
  res.report.warnings.insert(res.report.warnings.begin(), warnings.begin(), warnings.end());
  res.x = res.report.x_final;
  return res;
}

std::string to_string(MaskAnchor a) { return a == MaskAnchor::kBestCorner ? "corner" : "argmax"; }

MaskAnchor parse_mask_anchor(const std::string& s) {
  if (s == "corner") return MaskAnchor::kBestCorner;
  if (s == "argmax") return MaskAnchor::kArgmax;
  throw ParameterError("unknown mask anchor '" + s + "' (expected corner or argmax)");
}

DecayMask select_decay_mask(const RealGrid& abs_x, double margin, MaskAnchor policy) {
  for (double v : abs_x)
    if (!(v >= 0)) throw DomainError("magnitudes must be nonnegative");
  const Shape& n = abs_x.shape();
  if (policy == MaskAnchor::kArgmax) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < abs_x.size(); ++i)
      if (abs_x[i] > abs_x[best]) best = i;
    return build_decay_mask(abs_x, n.unravel(best), margin);
  }
  std::optional<DecayMask> best;
  const std::size_t corners = std::size_t{1} << n.rank();
  for (std::size_t c = 0; c < corners; ++c) {
    MultiIndex k(n.rank());
    for (std::size_t a = 0; a < n.rank(); ++a) k[a] = (c >> a) & 1 ? static_cast<std::int64_t>(n[a]) - 1 : 0;
    if (!(abs_x.at(k) > 0)) continue;
    DecayMask m = build_decay_mask(abs_x, k, margin);
    if (!best || m.r > best->r) best = std::move(m);
  }
  if (!best) throw InfeasibleError("every support corner has zero magnitude; use the argmax anchor");
  return *best;
}

MaskedMeasurement masked_measurements(const ComplexGrid& x, double margin, MaskAnchor policy) {
  MaskedMeasurement mm;
  mm.abs_x = abs(x);
  mm.mask = select_decay_mask(mm.abs_x, margin, policy);
  ComplexGrid dx = x;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mm.mask.values[i];
  mm.y2 = measure(dx, x.shape().scaled(2));
  return mm;
}

MaskedResult masked_fast_phase(const RealGrid& abs_x, const RealGrid& y2, double margin, const FastPhaseOptions& opts,
                               MaskAnchor policy) {
  const Shape& support = abs_x.shape();
  MaskedResult out;
  out.mask = select_decay_mask(abs_x, margin, policy);
  for (double v : out.mask.values)
    if (v < kMaskUnderflow)
      throw InfeasibleError("decay mask underflows (r = " + std::to_string(out.mask.r) +
                            "); use a larger base r or a smaller support");
  FastPhaseOptions inner = opts;
  inner.w = out.mask.anchor;
  out.inner = fast_phase_retrieve(y2, support, inner);
  // Unmasking divides rounding error by the mask, so far entries keep only
  // their phase; the moduli come from the first measurement.
  out.x = out.inner.x;
  for (std::size_t i = 0; i < out.x.size(); ++i) {
    const double m = std::abs(out.x[i]);
    out.x[i] = m > 0 ? out.x[i] * (abs_x[i] / m) : Complex(abs_x[i], 0.0);
  }
  return out;
}

ComplexGrid conj_reflect(const ComplexGrid& x) {
  const Shape& n = x.shape();
  ComplexGrid out(n);
  MultiIndex neg(n.rank());
  for_each_index(n, [&](const MultiIndex& i, std::size_t flat) {
    for (std::size_t a = 0; a < i.size(); ++a) neg[a] = -i[a];
    out[flat] = std::conj(x[n.flat_wrapped(neg)]);
  });
  return out;
}

AlignmentResult align(const ComplexGrid& candidate, const ComplexGrid& truth) {
  if (candidate.shape() != truth.shape()) throw DimensionError("align requires equal shapes");
  const Shape& n = truth.shape();
  const ComplexGrid T = fft(truth);
  AlignmentResult best;
  bool have = false;
  for (bool flip : {false, true}) {
    const ComplexGrid c = flip ? conj_reflect(candidate) : candidate;
    // corr[s] = <truth, shift(c, s)> = (1/N) fft(conj(T) C)[s]
    ComplexGrid corr = fft(c);
    for (std::size_t k = 0; k < corr.size(); ++k) corr[k] = std::conj(T[k]) * corr[k];
    fft_inplace(corr, FftDirection::kForward);
    const std::size_t s = argmax_abs(corr);
    const MultiIndex shift = n.unravel(s);
    ComplexGrid shifted = circular_shift(c, shift);
    const Complex ip = vdot(shifted, truth);
    const Complex phase = std::abs(ip) > 0 ? ip / std::abs(ip) : Complex(1.0);
    for (auto& v : shifted) v *= phase;
    double r2 = 0;
    for (std::size_t i = 0; i < shifted.size(); ++i) r2 += std::norm(shifted[i] - truth[i]);
    const double residual = std::sqrt(r2);
    if (!have || residual < best.residual) {
      best = AlignmentResult{std::move(shifted), shift, phase, flip, residual};
      have = true;
    }
  }
  return best;
}

double aligned_relative_error(const ComplexGrid& candidate, const ComplexGrid& truth) {
  const double tn = norm2(truth);
  if (!(tn > 0)) throw DomainError("truth has zero norm");
  return align(candidate, truth).residual / tn;
}

double rmse_db(const ComplexGrid& candidate, const ComplexGrid& truth) {
  const double rel = aligned_relative_error(candidate, truth);
  if (!(rel > 0)) return kRmseFloorDb;
  return std::max(kRmseFloorDb, 10.0 * std::log10(rel));
}

}  // namespace fastphase
