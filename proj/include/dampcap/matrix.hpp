#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "dampcap/error.hpp"

namespace dampcap {

// Dense row-major square matrix.
template <typename T>
class SquareMatrix {
 public:
  using value_type = T;

  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t dim, T fill = T{}) : dim_(dim), data_(dim * dim, fill) {}

  static SquareMatrix identity(std::size_t dim) {
    SquareMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }

  T& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * dim_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[row * dim_ + col];
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  SquareMatrix adjoint() const {
    SquareMatrix out(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c) out(c, r) = conjugate((*this)(r, c));
    return out;
  }

  T trace() const noexcept {
    T sum{};
    for (std::size_t i = 0; i < dim_; ++i) sum += (*this)(i, i);
    return sum;
  }

  SquareMatrix& operator+=(const SquareMatrix& other) {
    require_same_dim(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  friend SquareMatrix operator+(SquareMatrix lhs, const SquareMatrix& rhs) { return lhs += rhs; }

  friend SquareMatrix operator*(const SquareMatrix& lhs, const SquareMatrix& rhs) {
    lhs.require_same_dim(rhs);
    const std::size_t d = lhs.dim_;
    SquareMatrix out(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        const T a = lhs(i, k);
        if (a == T{}) continue;
        for (std::size_t j = 0; j < d; ++j) out(i, j) += a * rhs(k, j);
      }
    return out;
  }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  static T conjugate(const T& v) {
    if constexpr (requires { std::conj(v); } && !std::is_arithmetic_v<T>) {
      return std::conj(v);
    } else {
      return v;
    }
  }

  void require_same_dim(const SquareMatrix& other) const {
    if (other.dim_ != dim_) throw dimension_error("matrix dimensions differ");
  }

  std::size_t dim_ = 0;
  std::vector<T> data_;
};

using RealMatrix = SquareMatrix<double>;
using ComplexMatrix = SquareMatrix<std::complex<double>>;

}  // namespace dampcap
