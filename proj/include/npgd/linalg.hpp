#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace npgd {

using Vec = std::vector<double>;

/// Row-major dense matrix of 64-bit reals.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static Matrix identity(std::size_t n);
  Matrix transposed() const;
  bool all_finite() const;
};

/// Eigenvalues sorted descending; eigenvectors[.., i] pairs with eigenvalues[i].
struct EigenDecomposition {
  Vec eigenvalues;
  Matrix eigenvectors;  // column-orthonormal
};

Vec matvec(const Matrix& a, const Vec& x);
// y -> A^T y without forming the transpose.
Vec matvec_transpose(const Matrix& a, const Vec& y);

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Input must be square and symmetric (1e-12 relative asymmetry).
EigenDecomposition sym_eig(const Matrix& s);

double dot(const Vec& a, const Vec& b);
double squared_norm(const Vec& v);
double norm(const Vec& v);
double frobenius_norm(const Matrix& a);
Vec scaled(const Vec& v, double c);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
// a += c * b
void axpy(Vec& a, double c, const Vec& b);

std::string shape_string(const Matrix& a);

}  // namespace npgd
