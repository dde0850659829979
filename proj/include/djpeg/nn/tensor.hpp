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

#ifndef DJPEG_NN_TENSOR_HPP_
#define DJPEG_NN_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace djpeg::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);  // ShapeError on size mismatch

  std::size_t size() const { return data.size(); }
  // NumericError naming `what` if any element is NaN or infinite.
  void check_finite(std::string_view what = "tensor") const;

  bool operator==(const Tensor&) const = default;
};

void check_finite(std::span<const double> values, std::string_view what);

// Named parameters packed into one contiguous buffer so that optimizers and
// gradient reductions can treat them as a flat vector. Non-trainable entries
// (normalization statistics) live in the same buffer and never receive
// gradients.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Shape shape;
    std::size_t offset = 0;
    std::size_t size = 0;
    bool trainable = true;

    bool operator==(const Entry&) const = default;
  };

  // Returns the entry index. ConfigError on a duplicate name.
  std::size_t add(std::string name, Shape shape, bool trainable = true);

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t find(std::string_view name) const;  // ConfigError if absent
  bool contains(std::string_view name) const;

  std::span<double> values(std::size_t entry);
  std::span<const double> values(std::size_t entry) const;
  std::span<double> values(std::string_view name) { return values(find(name)); }
  std::span<const double> values(std::string_view name) const { return values(find(name)); }

  std::vector<double>& flat() { return flat_; }
  const std::vector<double>& flat() const { return flat_; }
  std::size_t size() const { return flat_.size(); }
  std::size_t trainable_size() const;

  // 1 for trainable elements, 0 otherwise; aligned with flat().
  std::vector<unsigned char> trainable_mask() const;

  bool operator==(const ParamStore&) const = default;

 private:
  std::vector<Entry> entries_;
  std::vector<double> flat_;
};

}  // namespace djpeg::nn

#endif  // DJPEG_NN_TENSOR_HPP_
