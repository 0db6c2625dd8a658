#ifndef KK_LINALG_HPP
#define KK_LINALG_HPP

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

// Fixed-capacity dense vectors/matrices for spacetime dimensions d <= 4
// plus one fiber direction (n <= 5). No heap, value semantics.

namespace kk {

inline constexpr int kMaxDim = 5;

class Vec {
  std::array<double, kMaxDim> v_{};
  int n_ = 0;

public:
  Vec() = default;
  explicit Vec(int n) : n_(n) { assert(n >= 0 && n <= kMaxDim); }
  Vec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
    assert(n_ <= kMaxDim);
    int i = 0;
    for (double x : xs) v_[i++] = x;
  }
  static Vec from(std::span<const double> xs) {
    Vec r(static_cast<int>(xs.size()));
    for (int i = 0; i < r.n_; ++i) r.v_[i] = xs[i];
    return r;
  }

  int size() const { return n_; }
  double& operator[](int i) { return v_[i]; }
  double operator[](int i) const { return v_[i]; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::span<const double> span() const { return {v_.data(), static_cast<size_t>(n_)}; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < n_; ++i) v_[i] += o.v_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < n_; ++i) v_[i] *= s;
    return *this;
  }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }

  double max_abs() const {
    double m = 0;
    for (int i = 0; i < n_; ++i) m = std::max(m, std::abs(v_[i]));
    return m;
  }
};

class Mat {
  std::array<double, kMaxDim * kMaxDim> m_{};
  int n_ = 0;

public:
  Mat() = default;
  explicit Mat(int n) : n_(n) { assert(n >= 0 && n <= kMaxDim); }

  static Mat identity(int n) {
    Mat r(n);
    for (int i = 0; i < n; ++i) r(i, i) = 1.0;
    return r;
  }
  static Mat diag(std::initializer_list<double> ds) {
    Mat r(static_cast<int>(ds.size()));
    int i = 0;
    for (double d : ds) r(i, i) = d, ++i;
    return r;
  }

  int size() const { return n_; }
  double& operator()(int i, int j) { return m_[i * kMaxDim + j]; }
  double operator()(int i, int j) const { return m_[i * kMaxDim + j]; }

  Mat& operator+=(const Mat& o) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j) += o(i, j);
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j) -= o(i, j);
    return *this;
  }
  Mat& operator*=(double s) {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) (*this)(i, j) *= s;
    return *this;
  }
  friend Mat operator*(double s, Mat a) { return a *= s; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }

  Vec mul(const Vec& x) const {
    Vec r(n_);
    for (int i = 0; i < n_; ++i) {
      double s = 0;
      for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
      r[i] = s;
    }
    return r;
  }
  Mat mul(const Mat& b) const {
    Mat r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) {
        double s = 0;
        for (int k = 0; k < n_; ++k) s += (*this)(i, k) * b(k, j);
        r(i, j) = s;
      }
    return r;
  }

  // x^T M y
  double quad(const Vec& x, const Vec& y) const {
    double s = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) s += x[i] * (*this)(i, j) * y[j];
    return s;
  }

  double max_abs() const {
    double m = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j)));
    return m;
  }

  double sym_defect() const {
    double m = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
    return m;
  }
};

// Rank-3 array T[i][j][k], all indices of equal range n <= kMaxDim.
// Used for metric derivatives (d_i g_jk) and Christoffel symbols (G^i_jk).
class Ten3 {
  std::array<double, kMaxDim * kMaxDim * kMaxDim> t_{};
  int n_ = 0;

public:
  Ten3() = default;
  explicit Ten3(int n) : n_(n) { assert(n >= 0 && n <= kMaxDim); }

  int size() const { return n_; }
  double& operator()(int i, int j, int k) { return t_[(i * kMaxDim + j) * kMaxDim + k]; }
  double operator()(int i, int j, int k) const { return t_[(i * kMaxDim + j) * kMaxDim + k]; }

  double max_abs() const {
    double m = 0;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k) m = std::max(m, std::abs((*this)(i, j, k)));
    return m;
  }
};

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// LU determinant with partial pivoting.
inline double det(Mat a) {
  const int n = a.size();
  double d = 1.0;
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    if (p != c) {
      for (int j = 0; j < n; ++j) std::swap(a(c, j), a(p, j));
      d = -d;
    }
    if (a(c, c) == 0.0) return 0.0;
    d *= a(c, c);
    for (int r = c + 1; r < n; ++r) {
      double f = a(r, c) / a(c, c);
      for (int j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return d;
}

// Gauss-Jordan inverse with partial pivoting.
inline Mat inverse(Mat a) {
  const int n = a.size();
  Mat inv = Mat::identity(n);
  for (int c = 0; c < n; ++c) {
    int p = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    if (std::abs(a(p, c)) < 1e-300) throw SingularMatrixError("singular matrix in inverse()");
    if (p != c)
      for (int j = 0; j < n; ++j) {
        std::swap(a(c, j), a(p, j));
        std::swap(inv(c, j), inv(p, j));
      }
    double piv = a(c, c);
    for (int j = 0; j < n; ++j) {
      a(c, j) /= piv;
      inv(c, j) /= piv;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      double f = a(r, c);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
// Only used for signature checks, so plain and unoptimized.
inline Vec sym_eigenvalues(Mat a) {
  const int n = a.size();
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
  }
  Vec ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a(i, i);
  return ev;
}

}  // namespace kk

#endif
