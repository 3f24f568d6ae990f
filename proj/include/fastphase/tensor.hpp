#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fastphase/errors.hpp"

namespace fastphase {

using Complex = std::complex<double>;
using MultiIndex = std::vector<std::int64_t>;

std::string to_string(const MultiIndex& k);
// Parses "1,2,3". Throws ParameterError on malformed input.
MultiIndex parse_multi_index(std::string_view text);

class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::size_t> dims);
  explicit Shape(std::vector<std::size_t> dims);

  std::size_t rank() const { return dims_.size(); }
  std::size_t operator[](std::size_t axis) const { return dims_[axis]; }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t size() const { return size_; }

  bool contains(const MultiIndex& k) const;
  std::size_t flat(const MultiIndex& k) const;
  // Flat offset after reducing every coordinate modulo the axis length.
  std::size_t flat_wrapped(const MultiIndex& k) const;
  MultiIndex unravel(std::size_t flat) const;

  // Elementwise a >= b, same rank required.
  bool dominates(const Shape& other) const;
  Shape scaled(std::size_t factor) const;

  std::string to_string() const;  // "8x8"
  static Shape parse(std::string_view text);

  bool operator==(const Shape& other) const { return dims_ == other.dims_; }
  bool operator!=(const Shape& other) const { return !(*this == other); }

 private:
  std::vector<std::size_t> dims_;
  std::size_t size_ = 0;
};

// Dense row-major grid, last axis fastest.
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  explicit Grid(Shape shape, T fill = T{}) : shape_(std::move(shape)), data_(shape_.size(), fill) {}
  Grid(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.size())
      throw DimensionError("grid data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_.to_string());
  }
  // Brace lists are element data, never a complex fill value.
  Grid(Shape shape, std::initializer_list<T> data) : Grid(std::move(shape), std::vector<T>(data)) {}

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(const MultiIndex& k) { return data_[shape_.flat(k)]; }
  const T& at(const MultiIndex& k) const { return data_[shape_.flat(k)]; }

  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool operator==(const Grid& other) const { return shape_ == other.shape_ && data_ == other.data_; }

 private:
  Shape shape_;
  std::vector<T> data_;
};

using ComplexGrid = Grid<Complex>;
using RealGrid = Grid<double>;

// Calls fn(index, flat) for every index of the shape in row-major order.
template <class Fn>
void for_each_index(const Shape& shape, Fn&& fn) {
  const std::size_t d = shape.rank();
  MultiIndex k(d, 0);
  for (std::size_t flat = 0; flat < shape.size(); ++flat) {
    fn(static_cast<const MultiIndex&>(k), flat);
    for (std::size_t a = d; a-- > 0;) {
      if (++k[a] < static_cast<std::int64_t>(shape[a])) break;
      k[a] = 0;
    }
  }
}

// out[(k + w) mod shape] = g[k]
template <class T>
Grid<T> circular_shift(const Grid<T>& g, const MultiIndex& w) {
  const Shape& s = g.shape();
  if (w.size() != s.rank()) throw DimensionError("shift rank does not match grid rank");
  Grid<T> out(s);
  MultiIndex target(s.rank());
  for_each_index(s, [&](const MultiIndex& k, std::size_t flat) {
    for (std::size_t a = 0; a < k.size(); ++a) target[a] = k[a] + w[a];
    out[s.flat_wrapped(target)] = g[flat];
  });
  return out;
}

// Embeds g at the origin of a larger zero grid.
template <class T>
Grid<T> zero_pad(const Grid<T>& g, const Shape& m) {
  if (!m.dominates(g.shape()))
    throw DimensionError("cannot pad " + g.shape().to_string() + " into " + m.to_string());
  Grid<T> out(m);
  for_each_index(g.shape(), [&](const MultiIndex& k, std::size_t flat) { out.at(k) = g[flat]; });
  return out;
}

// Leading box of shape n.
template <class T>
Grid<T> crop(const Grid<T>& g, const Shape& n) {
  if (!g.shape().dominates(n))
    throw DimensionError("cannot crop " + g.shape().to_string() + " to " + n.to_string());
  Grid<T> out(n);
  for_each_index(n, [&](const MultiIndex& k, std::size_t flat) { out[flat] = g.at(k); });
  return out;
}

double norm2(const ComplexGrid& g);
double norm2(const RealGrid& g);
double max_abs(const ComplexGrid& g);
double max_value(const RealGrid& g);
double sum(const RealGrid& g);
// Re sum conj(a_i) b_i, the real inner product of the stacked representation.
double real_dot(const ComplexGrid& a, const ComplexGrid& b);
Complex vdot(const ComplexGrid& a, const ComplexGrid& b);
ComplexGrid to_complex(const RealGrid& g);
RealGrid abs(const ComplexGrid& g);
RealGrid abs_squared(const ComplexGrid& g);
bool all_finite(const ComplexGrid& g);

// Flat index of the largest |g| (first in row-major order on ties).
std::size_t argmax_abs(const ComplexGrid& g);

}  // namespace fastphase
