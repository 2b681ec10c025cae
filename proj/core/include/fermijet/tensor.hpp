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

#pragma once

#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "fermijet/jet.hpp"
#include "fermijet/linalg.hpp"

namespace fermijet {

enum class Slot { kAmbient, kTangential, kNormal };

const char* slot_name(Slot s);

/// Row-major multi-index bookkeeping shared by the tensor containers.
class TensorShape {
 public:
  TensorShape() = default;
  explicit TensorShape(std::vector<int> dims);

  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int slot) const { return dims_[slot]; }
  const std::vector<int>& dims() const { return dims_; }
  int size() const { return size_; }

  int flatten(std::span<const int> idx) const;
  std::vector<int> unflatten(int flat) const;

 private:
  std::vector<int> dims_;
  std::vector<int> strides_;
  int size_ = 1;
};

/// Numeric all-covariant tensor at a point, with per-slot labels.
class TensorAtPoint {
 public:
  TensorAtPoint() = default;
  TensorAtPoint(std::vector<Slot> labels, std::vector<int> dims);

  int rank() const { return shape_.rank(); }
  const TensorShape& shape() const { return shape_; }
  Slot label(int slot) const { return labels_[slot]; }
  const std::vector<Slot>& labels() const { return labels_; }

  double& at(std::span<const int> idx) { return data_[shape_.flatten(idx)]; }
  double at(std::span<const int> idx) const { return data_[shape_.flatten(idx)]; }
  double& at(std::initializer_list<int> idx) { return at(std::span<const int>(idx.begin(), idx.size())); }
  double at(std::initializer_list<int> idx) const {
    return at(std::span<const int>(idx.begin(), idx.size()));
  }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double max_abs() const;
  /// max |T(..i..j..) + sign * T(..j..i..)| over all components.
  double swap_defect(int slot_a, int slot_b, double sign) const;

 private:
  TensorShape shape_;
  std::vector<Slot> labels_;
  std::vector<double> data_;
};

/// Tensor whose components are jets over a common layout.
class JetTensor {
 public:
  JetTensor() = default;
  JetTensor(std::vector<int> dims, const LayoutPtr& layout);

  int rank() const { return shape_.rank(); }
  const TensorShape& shape() const { return shape_; }
  const LayoutPtr& layout() const { return layout_; }
  int order() const { return layout_->order(); }

  Jet& at(std::span<const int> idx) { return data_[shape_.flatten(idx)]; }
  const Jet& at(std::span<const int> idx) const { return data_[shape_.flatten(idx)]; }
  Jet& at(std::initializer_list<int> idx) { return at(std::span<const int>(idx.begin(), idx.size())); }
  const Jet& at(std::initializer_list<int> idx) const {
    return at(std::span<const int>(idx.begin(), idx.size()));
  }
  Jet& flat(int i) { return data_[i]; }
  const Jet& flat(int i) const { return data_[i]; }

  /// Constant terms, labelled.
  TensorAtPoint constant(std::vector<Slot> labels) const;

 private:
  TensorShape shape_;
  LayoutPtr layout_;
  std::vector<Jet> data_;
};

JetTensor truncate(const JetTensor& t, int q);
/// Applies a jet substitution to every component.
JetTensor substitute(const JetTensor& t, const Substitution& sub);

/// T'(i_1..i_r) = sum T(a_1..a_r) M[s](a_s, i_s), one matrix per slot.
TensorAtPoint contract_slots(const TensorAtPoint& t, const std::vector<const Matrix*>& per_slot,
                             std::vector<Slot> labels);

}  // namespace fermijet
