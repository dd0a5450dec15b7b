#pragma once

#include <cstddef>
#include <vector>

namespace hgn::net {

// Dense value container. Gradients live in the graph, not here; a Tensor is
// just shape + storage.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> values;

  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor from(std::vector<std::size_t> shape, std::vector<double> values);
  static Tensor scalar(double v);

  std::size_t numel() const { return values.size(); }
  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const;
};

std::size_t shape_numel(const std::vector<std::size_t>& shape);

}  // namespace hgn::net
