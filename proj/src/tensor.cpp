#include "fastphase/tensor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace fastphase {

namespace {

template <class Int>
Int parse_int(std::string_view token, std::string_view what) {
  Int value{};
  auto* first = token.data();
  auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (token.empty() || ec != std::errc{} || ptr != last)
    throw ParameterError("malformed " + std::string(what) + " component '" + std::string(token) + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

std::string to_string(const MultiIndex& k) {
  std::string s;
  for (std::size_t a = 0; a < k.size(); ++a) {
    if (a) s += ',';
    s += std::to_string(k[a]);
  }
  return s;
}

MultiIndex parse_multi_index(std::string_view text) {
  MultiIndex k;
  for (auto tok : split(text, ',')) k.push_back(parse_int<std::int64_t>(tok, "multi-index"));
  return k;
}

Shape::Shape(std::initializer_list<std::size_t> dims) : Shape(std::vector<std::size_t>(dims)) {}

Shape::Shape(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("shape must have rank >= 1");
  size_ = 1;
  for (auto n : dims_) {
    if (n == 0) throw DimensionError("shape entries must be >= 1");
    if (size_ > std::numeric_limits<std::size_t>::max() / n) throw DimensionError("shape size overflows");
    size_ *= n;
  }
}

bool Shape::contains(const MultiIndex& k) const {
  if (k.size() != rank()) return false;
  for (std::size_t a = 0; a < k.size(); ++a)
    if (k[a] < 0 || k[a] >= static_cast<std::int64_t>(dims_[a])) return false;
  return true;
}

std::size_t Shape::flat(const MultiIndex& k) const {
  if (!contains(k)) throw DimensionError("index (" + fastphase::to_string(k) + ") outside shape " + to_string());
  std::size_t f = 0;
  for (std::size_t a = 0; a < k.size(); ++a) f = f * dims_[a] + static_cast<std::size_t>(k[a]);
  return f;
}

std::size_t Shape::flat_wrapped(const MultiIndex& k) const {
  std::size_t f = 0;
  for (std::size_t a = 0; a < k.size(); ++a) {
    const auto n = static_cast<std::int64_t>(dims_[a]);
    auto r = k[a] % n;
    if (r < 0) r += n;
    f = f * dims_[a] + static_cast<std::size_t>(r);
  }
  return f;
}

MultiIndex Shape::unravel(std::size_t flat) const {
  MultiIndex k(rank());
  for (std::size_t a = rank(); a-- > 0;) {
    k[a] = static_cast<std::int64_t>(flat % dims_[a]);
    flat /= dims_[a];
  }
  return k;
}

bool Shape::dominates(const Shape& other) const {
  if (rank() != other.rank()) return false;
  for (std::size_t a = 0; a < rank(); ++a)
    if (dims_[a] < other.dims_[a]) return false;
  return true;
}

Shape Shape::scaled(std::size_t factor) const {
  auto d = dims_;
  for (auto& v : d) v *= factor;
  return Shape(std::move(d));
}

std::string Shape::to_string() const {
  std::string s;
  for (std::size_t a = 0; a < dims_.size(); ++a) {
    if (a) s += 'x';
    s += std::to_string(dims_[a]);
  }
  return s;
}

Shape Shape::parse(std::string_view text) {
  std::vector<std::size_t> d;
  for (auto tok : split(text, 'x')) d.push_back(parse_int<std::size_t>(tok, "shape"));
  try {
    return Shape(std::move(d));
  } catch (const DimensionError& e) {
    throw ParameterError(std::string("invalid shape '") + std::string(text) + "': " + e.what());
  }
}

double norm2(const ComplexGrid& g) {
  double s = 0;
  for (const auto& v : g) s += std::norm(v);
  return std::sqrt(s);
}

double norm2(const RealGrid& g) {
  double s = 0;
  for (double v : g) s += v * v;
  return std::sqrt(s);
}

double max_abs(const ComplexGrid& g) {
  double m = 0;
  for (const auto& v : g) m = std::max(m, std::abs(v));
  return m;
}

double max_value(const RealGrid& g) { return *std::max_element(g.begin(), g.end()); }

double sum(const RealGrid& g) {
  double s = 0;
  for (double v : g) s += v;
  return s;
}

double real_dot(const ComplexGrid& a, const ComplexGrid& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return s;
}

Complex vdot(const ComplexGrid& a, const ComplexGrid& b) {
  Complex s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

ComplexGrid to_complex(const RealGrid& g) {
  ComplexGrid out(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i];
  return out;
}

RealGrid abs(const ComplexGrid& g) {
  RealGrid out(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::abs(g[i]);
  return out;
}

RealGrid abs_squared(const ComplexGrid& g) {
  RealGrid out(g.shape());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = std::norm(g[i]);
  return out;
}

bool all_finite(const ComplexGrid& g) {
  for (const auto& v : g)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

std::size_t argmax_abs(const ComplexGrid& g) {
  std::size_t best = 0;
  double bv = -1;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double v = std::abs(g[i]);
    if (v > bv) {
      bv = v;
      best = i;
    }
  }
  return best;
}

}  // namespace fastphase
