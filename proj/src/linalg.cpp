#include "npgd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace npgd {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols, rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Matrix::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string shape_string(const Matrix& a) {
  return std::to_string(a.rows) + "x" + std::to_string(a.cols);
}

Vec matvec(const Matrix& a, const Vec& x) {
  if (x.size() != a.cols)
    throw std::invalid_argument("matvec: matrix " + shape_string(a) +
                                " incompatible with vector of length " +
                                std::to_string(x.size()));
  Vec y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* row = a.data.data() + i * a.cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

Vec matvec_transpose(const Matrix& a, const Vec& y) {
  if (y.size() != a.rows)
    throw std::invalid_argument("matvec_transpose: matrix " + shape_string(a) +
                                " incompatible with vector of length " +
                                std::to_string(y.size()));
  Vec x(a.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* row = a.data.data() + i * a.cols;
    const double yi = y[i];
    for (std::size_t j = 0; j < a.cols; ++j) x[j] += row[j] * yi;
  }
  return x;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: length mismatch " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double squared_norm(const Vec& v) { return dot(v, v); }
double norm(const Vec& v) { return std::sqrt(squared_norm(v)); }

double frobenius_norm(const Matrix& a) {
  double acc = 0.0;
  for (double v : a.data) acc += v * v;
  return std::sqrt(acc);
}

Vec scaled(const Vec& v, double c) {
  Vec out(v);
  for (double& x : out) x *= c;
  return out;
}

Vec add(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("add: length mismatch");
  Vec out(a);
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Vec sub(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sub: length mismatch");
  Vec out(a);
  for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
  return out;
}

void axpy(Vec& a, double c, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("axpy: length mismatch");
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += c * b[i];
}

namespace {

double off_diagonal_frobenius(const Matrix& s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.rows; ++i)
    for (std::size_t j = 0; j < s.cols; ++j)
      if (i != j) acc += s(i, j) * s(i, j);
  return std::sqrt(acc);
}

// One Jacobi rotation zeroing s(p,q); accumulates the rotation into v.
void jacobi_rotate(Matrix& s, Matrix& v, std::size_t p, std::size_t q) {
  const double spq = s(p, q);
  if (spq == 0.0) return;
  const double theta = (s(q, q) - s(p, p)) / (2.0 * spq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double sn = t * c;
  const std::size_t n = s.rows;
  for (std::size_t k = 0; k < n; ++k) {
    const double skp = s(k, p);
    const double skq = s(k, q);
    s(k, p) = c * skp - sn * skq;
    s(k, q) = sn * skp + c * skq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double spk = s(p, k);
    const double sqk = s(q, k);
    s(p, k) = c * spk - sn * sqk;
    s(q, k) = sn * spk + c * sqk;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - sn * vkq;
    v(k, q) = sn * vkp + c * vkq;
  }
}

}  // namespace

EigenDecomposition sym_eig(const Matrix& input) {
  if (input.rows != input.cols)
    throw std::invalid_argument("sym_eig: matrix must be square, got " +
                                shape_string(input));
  const std::size_t n = input.rows;
  double max_abs = 0.0;
  for (double v : input.data) max_abs = std::max(max_abs, std::abs(v));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double asym = std::abs(input(i, j) - input(j, i));
      if (asym > 1e-12 * std::max(max_abs, 1e-300))
        throw std::invalid_argument("sym_eig: matrix is not symmetric (|S[" +
                                    std::to_string(i) + "][" + std::to_string(j) +
                                    "] - S[j][i]| = " + std::to_string(asym) + ")");
    }

  Matrix s = input;
  // Symmetrize exactly so rotations preserve symmetry bit-for-bit.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (s(i, j) + s(j, i));
      s(i, j) = avg;
      s(j, i) = avg;
    }
  Matrix v = Matrix::identity(n);

  const double fro = frobenius_norm(s);
  const double tol = 1e-12 * std::max(fro, 1e-300);
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_frobenius(s) <= tol) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) jacobi_rotate(s, v, p, q);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return s(a, a) > s(b, b); });

  EigenDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.eigenvalues[j] = s(src, src);
    // Sign convention: largest-magnitude entry positive.
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::abs(v(i, src));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    const double flip = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, j) = flip * v(i, src);
  }
  return out;
}

}  // namespace npgd
