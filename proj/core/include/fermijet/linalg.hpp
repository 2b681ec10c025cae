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

// Small dense matrices of reals and of jets. Dimensions here never exceed a
// handful, so everything is row-major std::vector storage.

#pragma once

#include <vector>

#include "fermijet/jet.hpp"

namespace fermijet {

class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0) : rows_(rows), cols_(cols), a_(rows * cols, fill) {}
  static Matrix identity(int n);
  static Matrix diagonal(const std::vector<double>& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[i * cols_ + j]; }
  double operator()(int i, int j) const { return a_[i * cols_ + j]; }

  std::vector<double> column(int j) const;
  void set_column(int j, const std::vector<double>& v);
  Matrix transpose() const;
  double max_abs() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, const std::vector<double>& v);

/// LU with partial pivoting. Throws JetError when a pivot falls below
/// rel_tol times the largest entry.
Matrix inverse(const Matrix& a, double rel_tol = 1e-13);
double determinant(const Matrix& a);
/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
std::vector<double> symmetric_eigenvalues(const Matrix& a);

/// g(u, v) = u^T g v.
double bilinear(const Matrix& g, const std::vector<double>& u, const std::vector<double>& v);

class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int rows, int cols, const LayoutPtr& layout);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const LayoutPtr& layout() const { return layout_; }
  Jet& operator()(int i, int j) { return a_[i * cols_ + j]; }
  const Jet& operator()(int i, int j) const { return a_[i * cols_ + j]; }

  Matrix constant() const;
  JetMatrix transpose() const;
  double max_abs() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  LayoutPtr layout_;
  std::vector<Jet> a_;
};

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b);
JetMatrix operator+(const JetMatrix& a, const JetMatrix& b);
JetMatrix operator-(const JetMatrix& a, const JetMatrix& b);
/// Promotes a real matrix to constant jets over layout.
JetMatrix lift(const Matrix& m, const LayoutPtr& layout);

/// Inverse of a jet-valued square matrix: LU on the constant term, then the
/// Neumann series sum_k (-A0^{-1} N)^k A0^{-1}, exact after order+1 terms
/// because the nonconstant part N is nilpotent under truncation.
JetMatrix inverse(const JetMatrix& a, double rel_tol = 1e-13);

JetMatrix truncate(const JetMatrix& m, int q);

}  // namespace fermijet
