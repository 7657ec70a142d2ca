#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "ofdmml/flops.hpp"

namespace ofdmml {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

/// Scalar types the linear-algebra kernels accept.
template <class T>
concept Scalar = std::is_same_v<T, double> || std::is_same_v<T, cplx>;

template <Scalar T>
constexpr T conj_of(T x) {
  if constexpr (is_complex_v<T>) {
    return std::conj(x);
  } else {
    return x;
  }
}

template <Scalar T>
constexpr double abs2(T x) {
  if constexpr (is_complex_v<T>) {
    return std::norm(x);
  } else {
    return x * x;
  }
}

/// Counts `n` multiply-adds in the scalar domain of T.
template <Scalar T>
inline void count_fma(std::uint64_t n) noexcept {
  if constexpr (is_complex_v<T>) {
    count(Op::complex_mul, n);
    count(Op::complex_add, n);
  } else {
    count(Op::real_mul, n);
    count(Op::real_add, n);
  }
}

/// Dense row-major matrix with strictly positive dimensions. A default
/// constructed matrix is an empty placeholder and must be assigned before use.
template <Scalar T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) {
      throw std::invalid_argument("Matrix: dimensions must be positive, got " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
    }
    data_.assign(rows * cols, fill);
  }
  Matrix(std::initializer_list<std::initializer_list<T>> rows)
      : Matrix(rows.size(), rows.size() ? rows.begin()->size() : 0) {
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (row.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
      std::copy(row.begin(), row.end(), data_.begin() + r * cols_);
      ++r;
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  static Matrix diagonal(std::span<const T> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  [[nodiscard]] std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  [[nodiscard]] std::span<const T> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  [[nodiscard]] std::vector<T> col(std::size_t c) const {
    std::vector<T> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using CMat = Matrix<cplx>;
using RMat = Matrix<double>;

template <Scalar T>
Matrix<T> adjoint(const Matrix<T>& a) {
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = conj_of(a(r, c));
  return out;
}

template <Scalar T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + ")");
  }
  Matrix<T> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  count_fma<T>(a.rows() * a.cols() * b.cols());
  return out;
}

template <Scalar T>
std::vector<T> operator*(const Matrix<T>& a, std::span<const T> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<T> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T acc{};
    auto arow = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) acc += arow[k] * x[k];
    out[i] = acc;
  }
  count_fma<T>(a.rows() * a.cols());
  return out;
}

template <Scalar T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("matrix subtract: shape mismatch");
  }
  Matrix<T> out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

template <Scalar T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("matrix add: shape mismatch");
  }
  Matrix<T> out = a;
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

template <Scalar T>
double frobenius_norm(const Matrix<T>& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += abs2(a.data()[i]);
  return std::sqrt(s);
}

template <Scalar T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

template <Scalar T>
bool all_finite(const Matrix<T>& a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if constexpr (is_complex_v<T>) {
      if (!std::isfinite(a.data()[i].real()) || !std::isfinite(a.data()[i].imag())) return false;
    } else {
      if (!std::isfinite(a.data()[i])) return false;
    }
  }
  return true;
}

inline double norm2(std::span<const cplx> x) {
  double s = 0.0;
  for (const auto& v : x) s += std::norm(v);
  return s;
}

inline double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Complex matrix from a real one.
inline CMat to_complex(const RMat& a) {
  CMat out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i];
  return out;
}

}  // namespace ofdmml
