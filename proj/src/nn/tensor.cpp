// Copyright 2026 The djpeg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "djpeg/nn/tensor.hpp"

#include <cmath>

#include "djpeg/error.hpp"

namespace djpeg::nn {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape s, double fill) : shape(std::move(s)), data(shape_size(shape), fill) {}

Tensor::Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
  require(data.size() == shape_size(shape), ErrorCode::kShapeError,
          "tensor data length " + std::to_string(data.size()) + " does not match shape " +
              shape_string(shape));
}

void Tensor::check_finite(std::string_view what) const { nn::check_finite(data, what); }

void check_finite(std::span<const double> values, std::string_view what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      fail(ErrorCode::kNumericError,
           std::string(what) + " has a non-finite value at element " + std::to_string(i));
    }
  }
}

std::size_t ParamStore::add(std::string name, Shape shape, bool trainable) {
  require(!contains(name), ErrorCode::kConfigError, "duplicate parameter " + name);
  Entry e{std::move(name), std::move(shape), flat_.size(), 0, trainable};
  e.size = shape_size(e.shape);
  flat_.resize(flat_.size() + e.size, 0.0);
  entries_.push_back(std::move(e));
  return entries_.size() - 1;
}

std::size_t ParamStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  fail(ErrorCode::kConfigError, "no parameter named " + std::string(name));
}

bool ParamStore::contains(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

std::span<double> ParamStore::values(std::size_t entry) {
  const Entry& e = entries_.at(entry);
  return std::span(flat_).subspan(e.offset, e.size);
}

std::span<const double> ParamStore::values(std::size_t entry) const {
  const Entry& e = entries_.at(entry);
  return std::span(flat_).subspan(e.offset, e.size);
}

std::size_t ParamStore::trainable_size() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.trainable ? e.size : 0;
  return n;
}

std::vector<unsigned char> ParamStore::trainable_mask() const {
  std::vector<unsigned char> mask(flat_.size(), 0);
  for (const auto& e : entries_) {
    if (e.trainable) std::fill_n(mask.begin() + e.offset, e.size, 1);
  }
  return mask;
}

}  // namespace djpeg::nn
