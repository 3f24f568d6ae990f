#include "fastphase/winding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fastphase/fft.hpp"

namespace fastphase {

namespace {

// Circular convolution of the autocorrelation magnitudes with the box of side n.
ComplexGrid box_convolution(const RealGrid& c, const Shape& support) {
  const Shape& m = c.shape();
  ComplexGrid h(m);
  for_each_index(support, [&](const MultiIndex& k, std::size_t) { h.at(k) = 1.0; });
  ComplexGrid C = fft(to_complex(c));
  fft_inplace(h, FftDirection::kForward);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] *= C[i];
  fft_inplace(h, FftDirection::kBackward);
  const double inv = 1.0 / static_cast<double>(m.size());
  for (auto& v : h) v *= inv;
  return h;
}

// Sums of g over symmetric lag boxes [-r, r] (wrapped into g's grid), via a
// prefix-sum table over lags -(n-1)..(n-1) on each axis.
class SymmetricBoxSums {
 public:
  SymmetricBoxSums(const RealGrid& g, const Shape& support) : support_(support) {
    std::vector<std::size_t> dims;
    for (std::size_t a = 0; a < support.rank(); ++a) dims.push_back(2 * support[a]);
    table_shape_ = Shape(dims);  // one leading zero row per axis
    table_ = RealGrid(table_shape_);
    MultiIndex lag(support.rank());
    for_each_index(table_shape_, [&](const MultiIndex& t, std::size_t flat) {
      for (std::size_t a = 0; a < t.size(); ++a)
        if (t[a] == 0) return;
      for (std::size_t a = 0; a < t.size(); ++a) lag[a] = t[a] - static_cast<std::int64_t>(support[a]);
      table_[flat] = g[g.shape().flat_wrapped(lag)];
    });
    // Inclusive prefix sums along each axis in turn.
    for (std::size_t a = 0; a < support.rank(); ++a) {
      MultiIndex prev;
      for_each_index(table_shape_, [&](const MultiIndex& t, std::size_t flat) {
        if (t[a] == 0) return;
        prev = t;
        prev[a] -= 1;
        table_[flat] += table_.at(prev);
      });
    }
  }

  double sum(const MultiIndex& radius) const {
    const std::size_t d = radius.size();
    double total = 0;
    MultiIndex corner(d);
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      int sign = 1;
      for (std::size_t a = 0; a < d; ++a) {
        const auto centre = static_cast<std::int64_t>(support_[a]);
        if (mask & (std::size_t{1} << a)) {
          corner[a] = centre - radius[a] - 1;
          sign = -sign;
        } else {
          corner[a] = centre + radius[a];
        }
      }
      total += sign * table_.at(corner);
    }
    return total;
  }

 private:
  Shape support_;
  Shape table_shape_;
  RealGrid table_;
};

}  // namespace

WindingResult winding_from_measurement(const RealGrid& y, const Shape& support, WindingMethod method) {
  if (!y.shape().dominates(support.scaled(2)))
    throw DimensionError("measurement shape " + y.shape().to_string() + " is undersampled for support " +
                         support.to_string());
  for (double v : y)
    if (!(v > 0)) throw DomainError("measurement must be strictly positive");

  RealGrid c = abs(idft(to_complex(y)));
  WindingResult result;
  result.score_grid = RealGrid(support);

  if (method == WindingMethod::kBoxConvolution) {
    ComplexGrid conv = box_convolution(c, support);
    double max_re = 0, max_im = 0;
    for (const auto& v : conv) {
      max_re = std::max(max_re, std::abs(v.real()));
      max_im = std::max(max_im, std::abs(v.imag()));
    }
    result.imag_residue = max_re > 0 ? max_im / max_re : 0;
    for_each_index(support, [&](const MultiIndex& k, std::size_t flat) {
      result.score_grid[flat] = conv.at(k).real();
    });
  } else {
    const double total = sum(c) - c[0];
    const double tau = total / static_cast<double>(c.size() - 1);
    RealGrid cc = c;
    for (auto& v : cc) v -= tau;
    cc[0] = 0;
    ComplexGrid conv = box_convolution(cc, support);
    double max_re = 0, max_im = 0;
    for (const auto& v : conv) {
      max_re = std::max(max_re, std::abs(v.real()));
      max_im = std::max(max_im, std::abs(v.imag()));
    }
    result.imag_residue = max_re > 0 ? max_im / max_re : 0;
    SymmetricBoxSums overlap(cc, support);
    MultiIndex radius(support.rank());
    for_each_index(support, [&](const MultiIndex& k, std::size_t flat) {
      for (std::size_t a = 0; a < k.size(); ++a)
        radius[a] = std::min<std::int64_t>(k[a], static_cast<std::int64_t>(support[a]) - 1 - k[a]);
      result.score_grid[flat] = 2.0 * conv.at(k).real() - overlap.sum(radius);
    });
  }

  const auto& s = result.score_grid;
  const double mx = *std::max_element(s.begin(), s.end());
  const double tol = 1e-9 * std::abs(mx);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s[i] >= mx - tol) result.tied.push_back(support.unravel(i));
  result.w = result.tied.front();
  result.tie = result.tied.size() > 1;
  return result;
}

MultiIndex reflected_index(const MultiIndex& w, const Shape& support) {
  MultiIndex r(w.size());
  for (std::size_t a = 0; a < w.size(); ++a) r[a] = static_cast<std::int64_t>(support[a]) - 1 - w[a];
  return r;
}

bool same_up_to_reflection(const MultiIndex& a, const MultiIndex& b, const Shape& support) {
  return a == b || a == reflected_index(b, support);
}

bool tie_is_reflection_pair(const WindingResult& r, const Shape& support) {
  if (!r.tie) return true;
  if (r.tied.size() > 2) return false;
  return r.tied[1] == reflected_index(r.tied[0], support);
}

int winding_of_object(const ComplexGrid& x, std::size_t axis, std::size_t samples) {
  const Shape& n = x.shape();
  if (axis >= n.rank()) throw ParameterError("axis out of range");
  const std::size_t len = n[axis];
  if (samples == 0) samples = 32 * len;
  if (samples < 2 * len) throw ParameterError("too few samples for winding evaluation");

  // Coefficients of the one-variable polynomial with other variables at 1.
  std::vector<Complex> a(len, 0.0);
  for_each_index(n, [&](const MultiIndex& k, std::size_t flat) { a[k[axis]] += x[flat]; });

  std::vector<Complex> p(samples);
  double pmax = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(samples));
    Complex acc = 0;
    for (std::size_t i = len; i-- > 0;) acc = acc * z + a[i];
    p[t] = acc;
    pmax = std::max(pmax, std::abs(acc));
  }
  double total = 0;
  for (std::size_t t = 0; t < samples; ++t) {
    if (!(std::abs(p[t]) > 1e-10 * pmax))
      throw SingularPathError("X(z) nearly vanishes on the sampled circle along axis " + std::to_string(axis));
    const double step = std::arg(p[(t + 1) % samples] / p[t]);
    if (std::abs(step) > 0.5 * std::numbers::pi)
      throw SingularPathError("phase increment too large; increase samples along axis " + std::to_string(axis));
    total += step;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

MultiIndex winding_of_object(const ComplexGrid& x) {
  MultiIndex w(x.shape().rank());
  for (std::size_t a = 0; a < w.size(); ++a) w[a] = winding_of_object(x, a);
  return w;
}

}  // namespace fastphase
