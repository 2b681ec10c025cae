// Copyright 2026 The fermijet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fermijet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace fermijet {

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const std::vector<double>& d) {
  const int n = static_cast<int>(d.size());
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = d[i];
  return m;
}

std::vector<double> Matrix::column(int j) const {
  std::vector<double> c(rows_);
  for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

void Matrix::set_column(int j, const std::vector<double>& v) {
  for (int i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw JetError("matrix product: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k)
      for (int j = 0; j < b.cols(); ++j) c(i, j) += a(i, k) * b(k, j);
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

std::vector<double> operator*(const Matrix& a, const std::vector<double>& v) {
  std::vector<double> r(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r[i] += a(i, j) * v[j];
  return r;
}

namespace {

struct Lu {
  Matrix lu;
  std::vector<int> perm;
  int sign = 1;
};

Lu decompose(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) throw JetError("inverse: matrix is not square");
  const int n = a.rows();
  Lu f{a, std::vector<int>(n), 1};
  for (int i = 0; i < n; ++i) f.perm[i] = i;
  const double scale = std::max(a.max_abs(), 1e-300);
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(f.lu(i, k)) > std::abs(f.lu(p, k))) p = i;
    if (std::abs(f.lu(p, k)) <= rel_tol * scale) throw JetError("inverse: singular matrix");
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(f.lu(p, j), f.lu(k, j));
      std::swap(f.perm[p], f.perm[k]);
      f.sign = -f.sign;
    }
    for (int i = k + 1; i < n; ++i) {
      f.lu(i, k) /= f.lu(k, k);
      for (int j = k + 1; j < n; ++j) f.lu(i, j) -= f.lu(i, k) * f.lu(k, j);
    }
  }
  return f;
}

}  // namespace

Matrix inverse(const Matrix& a, double rel_tol) {
  const Lu f = decompose(a, rel_tol);
  const int n = a.rows();
  Matrix inv(n, n);
  for (int col = 0; col < n; ++col) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = (f.perm[i] == col) ? 1.0 : 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    for (int i = n - 1; i >= 0; --i) {
      for (int j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
      x[i] /= f.lu(i, i);
    }
    inv.set_column(col, x);
  }
  return inv;
}

double determinant(const Matrix& a) {
  Lu f;
  try {
    f = decompose(a, 0.0);
  } catch (const JetError&) {
    return 0.0;
  }
  double d = f.sign;
  for (int i = 0; i < a.rows(); ++i) d *= f.lu(i, i);
  return d;
}

std::vector<double> symmetric_eigenvalues(const Matrix& a) {
  const int n = a.rows();
  Matrix m = a;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    if (off < 1e-30 * std::max(1.0, m.max_abs() * m.max_abs())) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (m(p, q) == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = m(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double bilinear(const Matrix& g, const std::vector<double>& u, const std::vector<double>& v) {
  double s = 0.0;
  for (int i = 0; i < g.rows(); ++i)
    for (int j = 0; j < g.cols(); ++j) s += u[i] * g(i, j) * v[j];
  return s;
}

// ---------------------------------------------------------------------------

JetMatrix::JetMatrix(int rows, int cols, const LayoutPtr& layout)
    : rows_(rows), cols_(cols), layout_(layout), a_(rows * cols, Jet(layout)) {}

Matrix JetMatrix::constant() const {
  Matrix m(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).value();
  return m;
}

JetMatrix JetMatrix::transpose() const {
  JetMatrix t(cols_, rows_, layout_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double JetMatrix::max_abs() const {
  double m = 0.0;
  for (const auto& j : a_) m = std::max(m, j.max_abs());
  return m;
}

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
  if (a.cols() != b.rows()) throw JetError("jet matrix product: shape mismatch");
  JetMatrix c(a.rows(), b.cols(), a.layout());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k)
      for (int j = 0; j < b.cols(); ++j) c(i, j).add_product(a(i, k), b(k, j));
  return c;
}

JetMatrix operator+(const JetMatrix& a, const JetMatrix& b) {
  JetMatrix c(a);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) += b(i, j);
  return c;
}

JetMatrix operator-(const JetMatrix& a, const JetMatrix& b) {
  JetMatrix c(a);
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
  return c;
}

JetMatrix lift(const Matrix& m, const LayoutPtr& layout) {
  JetMatrix r(m.rows(), m.cols(), layout);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = Jet(layout, m(i, j));
  return r;
}

JetMatrix inverse(const JetMatrix& a, double rel_tol) {
  const int n = a.rows();
  const Matrix a0inv = inverse(a.constant(), rel_tol);
  const JetMatrix base = lift(a0inv, a.layout());
  if (a.layout()->order() == 0) return base;

  // step = -A0^{-1} N
  JetMatrix nil(a);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) nil(i, j).coeff_at(0) = 0.0;
  JetMatrix step = base * nil;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) step(i, j) *= -1.0;

  JetMatrix term = base;
  JetMatrix sum = base;
  for (int k = 1; k <= a.layout()->order(); ++k) {
    term = step * term;
    sum = sum + term;
  }
  return sum;
}

JetMatrix truncate(const JetMatrix& m, int q) {
  JetMatrix r(m.rows(), m.cols(), JetLayout::get(m.layout()->nvars(), q));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r(i, j) = truncate(m(i, j), q);
  return r;
}

}  // namespace fermijet
