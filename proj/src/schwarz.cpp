#include "fastphase/schwarz.hpp"

#include <cmath>

#include "fastphase/fft.hpp"

namespace fastphase {

namespace {

void require_positive(const RealGrid& y) {
  for (double v : y)
    if (!(v > 0) || !std::isfinite(v)) throw DomainError("measurement must be strictly positive and finite");
}

std::size_t half_ceil(std::size_t m) { return (m + 1) / 2; }

}  // namespace

RealGrid resample_measurement(const RealGrid& y, std::size_t factor) {
  if (factor < 1) throw ParameterError("oversample factor must be >= 1");
  if (factor == 1) return y;
  const Shape& m = y.shape();
  const Shape fine = m.scaled(factor);
  const std::size_t d = m.rank();

  ComplexGrid coeff = ifft(to_complex(y));
  const double inv = 1.0 / static_cast<double>(m.size());

  // Each coarse frequency lands at its centred position on the fine grid. The
  // even-length Nyquist term is split evenly between +m/2 and -m/2.
  ComplexGrid padded(fine);
  std::vector<std::vector<std::pair<std::int64_t, double>>> targets(d);
  MultiIndex idx(d);
  for_each_index(m, [&](const MultiIndex& k, std::size_t flat) {
    for (std::size_t a = 0; a < d; ++a) {
      const auto ma = static_cast<std::int64_t>(m[a]);
      targets[a].clear();
      if (ma % 2 == 0 && k[a] == ma / 2) {
        targets[a].push_back({ma / 2, 0.5});
        targets[a].push_back({-ma / 2, 0.5});
      } else {
        targets[a].push_back({k[a] < static_cast<std::int64_t>(half_ceil(m[a])) ? k[a] : k[a] - ma, 1.0});
      }
    }
    std::vector<std::size_t> pick(d, 0);
    while (true) {
      double wgt = inv;
      for (std::size_t a = 0; a < d; ++a) {
        idx[a] = targets[a][pick[a]].first;
        wgt *= targets[a][pick[a]].second;
      }
      padded[fine.flat_wrapped(idx)] += wgt * coeff[flat];
      std::size_t a = d;
      while (a-- > 0) {
        if (++pick[a] < targets[a].size()) break;
        pick[a] = 0;
      }
      if (a == static_cast<std::size_t>(-1)) break;
    }
  });
  fft_inplace(padded, FftDirection::kForward);
  RealGrid out(fine);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = padded[i].real();
  return out;
}

ComplexGrid discrete_schwarz_transform(const RealGrid& y, const MultiIndex& w, const SchwarzConfig& cfg) {
  require_positive(y);
  const Shape& m = y.shape();
  if (w.size() != m.rank()) throw DimensionError("w rank does not match measurement rank");
  const std::size_t f = cfg.oversample_factor;
  const RealGrid yf = resample_measurement(y, f);
  const Shape& grid = yf.shape();

  ComplexGrid logy(grid);
  for (std::size_t i = 0; i < yf.size(); ++i) {
    if (!(yf[i] > 0))
      throw DomainError("resampled measurement is not positive; lower the oversample factor or denoise y");
    logy[i] = std::log(yf[i]);
  }

  ComplexGrid t = circular_shift(idft(logy), w);
  // In the shifted frame lag 0 sits at w. Weight 1 there, 2 on the rest of
  // the kept half-region [0, ceil(m/2)) per axis, 0 elsewhere.
  for_each_index(grid, [&](const MultiIndex& k, std::size_t flat) {
    bool kept = true;
    bool origin = true;
    for (std::size_t a = 0; a < k.size(); ++a) {
      if (static_cast<std::size_t>(k[a]) >= half_ceil(grid[a])) kept = false;
      if (k[a] != w[a]) origin = false;
    }
    if (!kept) t[flat] = 0;
    else if (!origin) t[flat] *= 2.0;
  });
  MultiIndex back(w.size());
  for (std::size_t a = 0; a < w.size(); ++a) back[a] = -w[a];
  ComplexGrid S = dft(circular_shift(t, back));
  if (f == 1) return S;

  ComplexGrid out(m);
  MultiIndex fk(m.rank());
  for_each_index(m, [&](const MultiIndex& k, std::size_t flat) {
    for (std::size_t a = 0; a < k.size(); ++a) fk[a] = k[a] * static_cast<std::int64_t>(f);
    out[flat] = S.at(fk);
  });
  return out;
}

ComplexGrid schwarz_init(const RealGrid& y, const MultiIndex& w, const Shape& support, const SchwarzConfig& cfg) {
  if (!support.contains(w)) throw ParameterError("w = (" + to_string(w) + ") outside support " + support.to_string());
  ComplexGrid S = discrete_schwarz_transform(y, w, cfg);
  for (auto& v : S) v = std::exp(0.5 * v);
  return crop(circular_shift(idft(S), w), support);
}

ComplexGrid conj_flip(const ComplexGrid& x, const MultiIndex& w) {
  const Shape& n = x.shape();
  if (!n.contains(w)) throw ParameterError("w outside support");
  ComplexGrid out(n);
  MultiIndex target(n.rank());
  for_each_index(n, [&](const MultiIndex& i, std::size_t flat) {
    for (std::size_t a = 0; a < i.size(); ++a) target[a] = 2 * w[a] - i[a];
    out[n.flat_wrapped(target)] = std::conj(x[flat]);
  });
  out.at(w) = 0;
  return out;
}

ComplexGrid schwarz_identity_coefficients(const ComplexGrid& x, const MultiIndex& w, const Shape& m) {
  const Shape& n = x.shape();
  ComplexGrid out = zero_pad(x, m);
  MultiIndex a(n.rank());
  for_each_index(n, [&](const MultiIndex& i, std::size_t flat) {
    if (i == w) return;
    for (std::size_t ax = 0; ax < i.size(); ++ax) {
      a[ax] = 2 * w[ax] - i[ax];
      if (a[ax] < 0 || static_cast<std::size_t>(a[ax]) >= half_ceil(m[ax])) return;
    }
    out.at(a) += std::conj(x[flat]);
  });
  return out;
}

ComplexGrid schwarz_exp_half(const RealGrid& y, const MultiIndex& w, const SchwarzConfig& cfg) {
  ComplexGrid S = discrete_schwarz_transform(y, w, cfg);
  for (auto& v : S) v = std::exp(0.5 * v);
  return dft(circular_shift(idft(S), w));
}

double max_relative_deviation(const ComplexGrid& a, const ComplexGrid& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return num / den;
}

double schwarz_identity_error(const ComplexGrid& x, const MultiIndex& w, const Shape& m, const SchwarzConfig& cfg) {
  const RealGrid y = abs_squared(dft_oversampled(x, m));
  // Values of exp(S/2) z^w on the m-grid.
  ComplexGrid E = schwarz_exp_half(y, w, cfg);
  ComplexGrid T = dft(schwarz_identity_coefficients(x, w, m));
  const Complex xw = x.at(w);
  const Complex phase = std::abs(xw) > 0 ? std::conj(xw) / std::abs(xw) : Complex(1.0);
  for (auto& v : T) v *= phase;
  return max_relative_deviation(E, T);
}

double schwarz_quadrature_error(const RealGrid& y, const MultiIndex& w, std::size_t factor,
                                std::size_t reference_factor) {
  return max_relative_deviation(schwarz_exp_half(y, w, SchwarzConfig{factor}),
                                schwarz_exp_half(y, w, SchwarzConfig{reference_factor}));
}

}  // namespace fastphase
