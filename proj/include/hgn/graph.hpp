#pragma once

#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

#include "hgn/heatmap.hpp"
#include "hgn/tensor.hpp"

// Reverse-mode tape. Ops evaluate eagerly and record a backward closure;
// nodes are created in topological order, so backward() is a single reverse
// sweep. One Graph instance records one forward trace (typically one sample)
// and is not meant to be shared across threads.

namespace hgn::net {

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Graph {
 public:
  // Leaf whose storage lives outside the graph (parameters, inputs). The
  // pointee must outlive the graph.
  Var external(const Tensor* values, bool requires_grad = true);
  Var constant(Tensor values);

  Var conv2d(Var x, Var w, Var b, int stride);
  Var relu(Var x);
  Var upsample_nearest2x(Var x);
  Var global_avg_pool(Var x);
  Var affine(Var x, Var w, Var b);
  Var softplus(Var x);
  Var offset(Var x, double c);

  // Heatmap bridge ops; tensors shaped {C, H, W}, points {C, 2} as (x, y)
  // in input pixels.
  Var spatial_softmax(Var logits);
  Var soft_argmax(Var normalized, double scale);
  Var heatmap_l1(Var pred_normalized, const hm::HeatmapStack& target);

  // Geometry bridge: points {C, 2} rows (iris center, eyeball center, ...),
  // radius {1} -> {theta, phi}. Clamped arcsin regions pass zero gradient.
  Var reconstruct_gaze(Var points, Var radius);

  Var abs_diff(Var x, Tensor target);  // elementwise |x - t|
  Var sum(Var x);                      // -> {1}
  Var uncertainty_loss(Var residuals, Var alpha);  // {2},{2} -> {1}
  Var weighted_sum(std::initializer_list<std::pair<Var, double>> terms);
  Var weighted_sum(const std::vector<std::pair<Var, double>>& terms);

  void backward(Var root);  // root must be a scalar

  const Tensor& value(Var v) const;
  // Zero-filled if the node was never reached by backward.
  Tensor grad_or_zero(Var v) const;
  bool has_grad(Var v) const;
  const Tensor& grad(Var v) const;  // contract error if never touched

  // Sum of gradients over every external leaf bound to `storage`
  // (zero-filled when backward never reached it).
  Tensor external_grad(const Tensor* storage) const;
  // Same, accumulated into an existing buffer of matching size.
  void external_grad_into(const Tensor* storage, Tensor& accumulator) const;

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;  // set instead of owned for external leaves
    Tensor grad;                       // empty until touched by backward
    bool requires_grad = false;
    std::function<void(Graph&, int)> backward_fn;

    const Tensor& value() const { return external ? *external : owned; }
  };

  int add_node(Tensor owned, bool requires_grad, std::function<void(Graph&, int)> fn);
  int add_result(Tensor value, std::initializer_list<Var> inputs,
                 std::function<void(Graph&, int)> fn);
  Tensor& ensure_grad(int id);
  bool needs_grad(Var v) const;
  const Tensor& val(int id) const { return nodes_[id].value(); }

  std::vector<Node> nodes_;
};

}  // namespace hgn::net
