#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <type_traits>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ofdmml/numerics/matrix.hpp"

namespace ofdmml {

/// Thin SVD A = U diag(s) V^H with s sorted descending. For an m x n input,
/// U is m x r, V is n x r with r = min(m, n). Columns of U belonging to zero
/// singular values are left zero.
template <Scalar T>
struct Svd {
  Matrix<T> u;
  std::vector<double> s;
  Matrix<T> v;
};

namespace detail {

/// Householder reflectors for A = QR (m >= n). Reflector k acts on rows k..m-1
/// as I - beta v v^H with v stored in column k of `vectors` (rows >= k).
template <Scalar T>
struct HouseholderQr {
  Matrix<T> vectors;
  std::vector<double> beta;
  Matrix<T> r;
};

template <Scalar T>
HouseholderQr<T> householder_qr(Matrix<T> a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  HouseholderQr<T> qr{Matrix<T>(m, n), std::vector<double>(n, 0.0), Matrix<T>(n, n)};
  for (std::size_t k = 0; k < n && k < m; ++k) {
    double xnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) xnorm2 += abs2(a(i, k));
    const double xnorm = std::sqrt(xnorm2);
    count_fma<T>(m - k);
    if (xnorm == 0.0) continue;

    // alpha = -phase(x0) * |x|, v = x - alpha e1 avoids cancellation.
    const T x0 = a(k, k);
    T phase{1};
    if (std::abs(x0) > 0.0) phase = x0 / std::abs(x0);
    const T alpha = -phase * xnorm;
    for (std::size_t i = k; i < m; ++i) qr.vectors(i, k) = a(i, k);
    qr.vectors(k, k) -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) vnorm2 += abs2(qr.vectors(i, k));
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    qr.beta[k] = beta;

    for (std::size_t j = k; j < n; ++j) {
      T dot{};
      for (std::size_t i = k; i < m; ++i) dot += conj_of(qr.vectors(i, k)) * a(i, j);
      dot *= beta;
      for (std::size_t i = k; i < m; ++i) a(i, j) -= qr.vectors(i, k) * dot;
    }
    count_fma<T>(2 * (m - k) * (n - k) + (m - k));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) qr.r(i, j) = a(i, j);
  return qr;
}

/// b <- Q^H b for the reflectors in `qr`.
template <Scalar T>
void apply_qh(const HouseholderQr<T>& qr, Matrix<T>& b) {
  const std::size_t m = qr.vectors.rows();
  const std::size_t n = qr.vectors.cols();
  for (std::size_t k = 0; k < n; ++k) {
    if (qr.beta[k] == 0.0) continue;
    for (std::size_t j = 0; j < b.cols(); ++j) {
      T dot{};
      for (std::size_t i = k; i < m; ++i) dot += conj_of(qr.vectors(i, k)) * b(i, j);
      dot *= qr.beta[k];
      for (std::size_t i = k; i < m; ++i) b(i, j) -= qr.vectors(i, k) * dot;
    }
    count_fma<T>(2 * (m - k) * b.cols());
  }
}

/// b <- Q b for the reflectors in `qr`.
template <Scalar T>
void apply_q(const HouseholderQr<T>& qr, Matrix<T>& b) {
  const std::size_t m = qr.vectors.rows();
  const std::size_t n = qr.vectors.cols();
  for (std::size_t kk = n; kk-- > 0;) {
    if (qr.beta[kk] == 0.0) continue;
    for (std::size_t j = 0; j < b.cols(); ++j) {
      T dot{};
      for (std::size_t i = kk; i < m; ++i) dot += conj_of(qr.vectors(i, kk)) * b(i, j);
      dot *= qr.beta[kk];
      for (std::size_t i = kk; i < m; ++i) b(i, j) -= qr.vectors(i, kk) * dot;
    }
    count_fma<T>(2 * (m - kk) * b.cols());
  }
}

/// One-sided (Hestenes) Jacobi on the columns of w (m x n). On return the
/// columns of w are mutually orthogonal, w_in * v = w_out, and v is unitary.
template <Scalar T>
Matrix<T> one_sided_jacobi(Matrix<T>& w) {
  const std::size_t m = w.rows();
  const std::size_t n = w.cols();
  Matrix<T> v = Matrix<T>::identity(n);
  const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(std::max<std::size_t>(m, 1));
  constexpr int kMaxSweeps = 100;
  // Work on columns as contiguous arrays for locality.
  std::vector<std::vector<T>> cols(n, std::vector<T>(m));
  std::vector<std::vector<T>> vcols(n, std::vector<T>(n));
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) cols[j][i] = w(i, j);
    vcols[j][j] = T{1};
  }
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto& cp = cols[p];
        auto& cq = cols[q];
        double alpha = 0.0;
        double beta = 0.0;
        T gamma{};
        for (std::size_t i = 0; i < m; ++i) {
          alpha += abs2(cp[i]);
          beta += abs2(cq[i]);
          gamma += conj_of(cp[i]) * cq[i];
        }
        count_fma<T>(3 * m);
        const double g = std::abs(gamma);
        if (g == 0.0 || g <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        T phase_conj{1};  // e^{-i arg(gamma)}
        if constexpr (is_complex_v<T>) phase_conj = std::conj(gamma) / g;
        else phase_conj = gamma > 0 ? 1.0 : -1.0;
        const double zeta = (beta - alpha) / (2.0 * g);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const T xp = cp[i];
          const T xq = cq[i] * phase_conj;
          cp[i] = c * xp - s * xq;
          cq[i] = s * xp + c * xq;
        }
        auto& vp = vcols[p];
        auto& vq = vcols[q];
        for (std::size_t i = 0; i < n; ++i) {
          const T xp = vp[i];
          const T xq = vq[i] * phase_conj;
          vp[i] = c * xp - s * xq;
          vq[i] = s * xp + c * xq;
        }
        count_fma<T>(3 * (m + n));
        count(Op::sqrt, 3);
      }
    }
    if (!rotated) break;
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) w(i, j) = cols[j][i];
    for (std::size_t i = 0; i < n; ++i) v(i, j) = vcols[j][i];
  }
  return v;
}

/// SVD of a tall (m >= n) matrix given its QR factorisation.
template <Scalar T>
Svd<T> svd_from_qr(const HouseholderQr<T>& qr, std::size_t m) {
  Matrix<T> w = qr.r;
  const std::size_t n = w.cols();
  Matrix<T> v = one_sided_jacobi(w);
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) {
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += abs2(w(i, j));
    s[j] = std::sqrt(nrm);
  }
  count_fma<T>(n * n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });

  Svd<T> out{Matrix<T>(m, n), std::vector<double>(n), Matrix<T>(n, n)};
  Matrix<T> ur(m, n);  // rows n..m-1 stay zero before applying Q
  for (std::size_t jj = 0; jj < n; ++jj) {
    const std::size_t j = order[jj];
    out.s[jj] = s[j];
    for (std::size_t i = 0; i < n; ++i) out.v(i, jj) = v(i, j);
    if (s[j] > 0.0) {
      for (std::size_t i = 0; i < n; ++i) ur(i, jj) = w(i, j) / s[j];
    }
  }
  apply_q(qr, ur);
  out.u = std::move(ur);
  return out;
}

inline double default_rcond(std::size_t m, std::size_t n) {
  return static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon();
}

}  // namespace detail

/// Thin SVD via Householder QR followed by one-sided Jacobi on R.
template <Scalar T>
Svd<T> svd(const Matrix<T>& a) {
  if (a.empty()) throw std::invalid_argument("svd: empty matrix");
  if (a.rows() < a.cols()) {
    Svd<T> t = svd(adjoint(a));
    return Svd<T>{std::move(t.v), std::move(t.s), std::move(t.u)};
  }
  const auto qr = detail::householder_qr(a);
  return detail::svd_from_qr(qr, a.rows());
}

/// Moore-Penrose pseudoinverse. Singular values below rcond * sigma_max are
/// treated as zero; rcond < 0 selects max(m, n) * machine epsilon.
template <Scalar T>
Matrix<T> pinv(const Matrix<T>& a, double rcond = -1.0) {
  count(Op::linear_solve, 1);
  const Svd<T> d = svd(a);
  if (rcond < 0.0) rcond = detail::default_rcond(a.rows(), a.cols());
  const double smax = d.s.empty() ? 0.0 : d.s.front();
  const double cutoff = rcond * smax;
  const std::size_t r = d.s.size();
  Matrix<T> out(a.cols(), a.rows());
  for (std::size_t k = 0; k < r; ++k) {
    if (!(d.s[k] > cutoff) || d.s[k] == 0.0) continue;
    const double inv = 1.0 / d.s[k];
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const T vik = d.v(i, k) * inv;
      for (std::size_t j = 0; j < a.rows(); ++j) out(i, j) += vik * conj_of(d.u(j, k));
    }
  }
  count_fma<T>(r * a.rows() * a.cols());
  return out;
}

/// Minimum-norm least-squares solution of A B = Y (Frobenius residual).
template <Scalar T>
Matrix<T> lstsq(const Matrix<T>& a, const Matrix<T>& y, double rcond = -1.0) {
  if (a.rows() != y.rows()) {
    throw std::invalid_argument("lstsq: row counts differ (" + std::to_string(a.rows()) + " vs " +
                                std::to_string(y.rows()) + ")");
  }
  if (a.rows() < a.cols()) return pinv(a, rcond) * y;

  count(Op::linear_solve, 1);
  if (rcond < 0.0) rcond = detail::default_rcond(a.rows(), a.cols());
  const std::size_t n = a.cols();
  const auto qr = detail::householder_qr(a);
  Matrix<T> qy = y;
  detail::apply_qh(qr, qy);

  // Jacobi on R^H converges in far fewer sweeps than on R. With
  // R^H V = W (orthogonal columns, norms s_j): R = V S Wn^H, Wn = W S^-1.
  Matrix<T> w = adjoint(qr.r);
  const Matrix<T> v = detail::one_sided_jacobi(w);
  std::vector<double> s(n);
  double smax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += abs2(w(i, j));
    s[j] = std::sqrt(nrm);
    smax = std::max(smax, s[j]);
  }
  count_fma<T>(n * n);
  const double cutoff = rcond * smax;

  // Minimum-norm solution of R B = rhs: B = sum_j w_j (v_j^H rhs) / s_j^2.
  auto solve_r = [&](const Matrix<T>& rhs) {
    Matrix<T> b(n, rhs.cols());
    for (std::size_t j = 0; j < n; ++j) {
      if (!(s[j] > cutoff) || s[j] == 0.0) continue;
      const double inv2 = 1.0 / (s[j] * s[j]);
      for (std::size_t c = 0; c < rhs.cols(); ++c) {
        T coef{};
        for (std::size_t i = 0; i < n; ++i) coef += conj_of(v(i, j)) * rhs(i, c);
        coef *= inv2;
        for (std::size_t i = 0; i < n; ++i) b(i, c) += w(i, j) * coef;
      }
    }
    count_fma<T>(2 * n * n * rhs.cols());
    return b;
  };

  Matrix<T> top(n, y.cols());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < y.cols(); ++c) top(i, c) = qy(i, c);
  Matrix<T> b = solve_r(top);

  // Iterative refinement against the original system: the residual Y - A B
  // is accumulated in extended precision and projected through Q^H.
  using Wide = std::conditional_t<is_complex_v<T>, std::complex<long double>, long double>;
  constexpr int kRefinementSteps = 2;
  const std::size_t m = a.rows();
  for (int step = 0; step < kRefinementSteps; ++step) {
    Matrix<T> res(m, y.cols());
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t c = 0; c < y.cols(); ++c) {
        Wide acc = static_cast<Wide>(y(i, c));
        for (std::size_t k = 0; k < n; ++k) acc -= static_cast<Wide>(a(i, k)) * static_cast<Wide>(b(k, c));
        res(i, c) = static_cast<T>(acc);
      }
    }
    count_fma<T>(m * n * y.cols());
    detail::apply_qh(qr, res);
    Matrix<T> head(n, y.cols());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < y.cols(); ++c) head(i, c) = res(i, c);
    const Matrix<T> delta = solve_r(head);
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] += delta.data()[i];
  }
  return b;
}

/// Solves A X = B for Hermitian positive definite A by Cholesky factorisation.
template <Scalar T>
Matrix<T> cholesky_solve(const Matrix<T>& a, const Matrix<T>& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("cholesky_solve: matrix not square");
  if (b.rows() != n) throw std::invalid_argument("cholesky_solve: right-hand side rows differ");
  count(Op::linear_solve, 1);
  Matrix<T> l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = std::real(a(j, j));
    for (std::size_t k = 0; k < j; ++k) d -= abs2(l(j, k));
    if (!(d > 0.0)) throw std::domain_error("cholesky_solve: matrix not positive definite");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      T acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * conj_of(l(j, k));
      l(i, j) = acc / ljj;
    }
  }
  count_fma<T>(n * n * n / 6 + n * n);
  count(Op::sqrt, n);

  Matrix<T> x = b;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {  // L z = b
      T acc = x(i, c);
      for (std::size_t k = 0; k < i; ++k) acc -= l(i, k) * x(k, c);
      x(i, c) = acc / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {  // L^H x = z
      T acc = x(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) acc -= conj_of(l(k, ii)) * x(k, c);
      x(ii, c) = acc / l(ii, ii);
    }
  }
  count_fma<T>(n * n * b.cols());
  return x;
}

/// Solves A X = B for square A by LU with partial pivoting.
template <Scalar T>
Matrix<T> lu_solve(Matrix<T> a, Matrix<T> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("lu_solve: matrix not square");
  if (b.rows() != n) throw std::invalid_argument("lu_solve: right-hand side rows differ");
  count(Op::linear_solve, 1);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) == 0.0) throw std::domain_error("lu_solve: singular matrix");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const T f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
    }
  }
  count_fma<T>(n * n * n / 3 + n * n * b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t ii = n; ii-- > 0;) {
      T acc = b(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) acc -= a(ii, k) * b(k, c);
      b(ii, c) = acc / a(ii, ii);
    }
  }
  return b;
}

}  // namespace ofdmml
