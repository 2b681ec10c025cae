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

#include "fermijet/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace fermijet {

const char* slot_name(Slot s) {
  switch (s) {
    case Slot::kAmbient:
      return "ambient";
    case Slot::kTangential:
      return "tangential";
    case Slot::kNormal:
      return "normal";
  }
  return "?";
}

TensorShape::TensorShape(std::vector<int> dims) : dims_(std::move(dims)), strides_(dims_.size()) {
  size_ = 1;
  for (int s = rank() - 1; s >= 0; --s) {
    if (dims_[s] < 0) throw JetError("TensorShape: negative dimension");
    strides_[s] = size_;
    size_ *= dims_[s];
  }
}

int TensorShape::flatten(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != rank()) throw JetError("tensor index rank mismatch");
  int f = 0;
  for (int s = 0; s < rank(); ++s) {
    if (idx[s] < 0 || idx[s] >= dims_[s]) throw JetError("tensor index out of range");
    f += idx[s] * strides_[s];
  }
  return f;
}

std::vector<int> TensorShape::unflatten(int flat) const {
  std::vector<int> idx(rank());
  for (int s = 0; s < rank(); ++s) {
    idx[s] = flat / strides_[s];
    flat %= strides_[s];
  }
  return idx;
}

TensorAtPoint::TensorAtPoint(std::vector<Slot> labels, std::vector<int> dims)
    : shape_(std::move(dims)), labels_(std::move(labels)), data_(shape_.size(), 0.0) {
  if (static_cast<int>(labels_.size()) != shape_.rank())
    throw JetError("TensorAtPoint: labels do not match rank");
}

double TensorAtPoint::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double TensorAtPoint::swap_defect(int slot_a, int slot_b, double sign) const {
  double worst = 0.0;
  for (int f = 0; f < shape_.size(); ++f) {
    auto idx = shape_.unflatten(f);
    std::swap(idx[slot_a], idx[slot_b]);
    worst = std::max(worst, std::abs(data_[f] + sign * at(idx)));
  }
  return worst;
}

JetTensor::JetTensor(std::vector<int> dims, const LayoutPtr& layout)
    : shape_(std::move(dims)), layout_(layout), data_(shape_.size(), Jet(layout)) {}

TensorAtPoint JetTensor::constant(std::vector<Slot> labels) const {
  TensorAtPoint t(std::move(labels), shape_.dims());
  for (int f = 0; f < shape_.size(); ++f) t.data()[f] = data_[f].value();
  return t;
}

JetTensor truncate(const JetTensor& t, int q) {
  JetTensor r(t.shape().dims(), JetLayout::get(t.layout()->nvars(), q));
  for (int f = 0; f < t.shape().size(); ++f) r.flat(f) = truncate(t.flat(f), q);
  return r;
}

JetTensor substitute(const JetTensor& t, const Substitution& sub) {
  JetTensor r;
  bool first = true;
  for (int f = 0; f < t.shape().size(); ++f) {
    Jet v = sub.apply(t.flat(f));
    if (first) {
      r = JetTensor(t.shape().dims(), v.layout());
      first = false;
    }
    r.flat(f) = std::move(v);
  }
  return r;
}

TensorAtPoint contract_slots(const TensorAtPoint& t, const std::vector<const Matrix*>& per_slot,
                             std::vector<Slot> labels) {
  const int r = t.rank();
  if (static_cast<int>(per_slot.size()) != r) throw JetError("contract_slots: one matrix per slot");
  std::vector<int> dims(r);
  for (int s = 0; s < r; ++s) {
    if (per_slot[s]->rows() != t.shape().dim(s)) throw JetError("contract_slots: dimension mismatch");
    dims[s] = per_slot[s]->cols();
  }
  // Contract one slot at a time.
  TensorAtPoint cur = t;
  for (int s = 0; s < r; ++s) {
    std::vector<int> nd = cur.shape().dims();
    nd[s] = dims[s];
    TensorAtPoint next(labels, nd);
    const Matrix& m = *per_slot[s];
    for (int f = 0; f < next.shape().size(); ++f) {
      auto idx = next.shape().unflatten(f);
      const int out = idx[s];
      double acc = 0.0;
      for (int a = 0; a < m.rows(); ++a) {
        idx[s] = a;
        acc += cur.at(idx) * m(a, out);
      }
      next.data()[f] = acc;
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace fermijet
