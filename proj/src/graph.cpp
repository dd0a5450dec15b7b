#include "hgn/graph.hpp"

#include <cmath>
#include <memory>
#include <utility>

#include "hgn/losses.hpp"

#include "hgn/error.hpp"

namespace hgn::net {
namespace {

hm::HeatmapStack stack_from_tensor(const Tensor& t) {
  if (t.shape.size() != 3) {
    raise(ErrorCategory::contract, "expected a {C,H,W} tensor");
  }
  hm::HeatmapStack s(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]),
                     static_cast<int>(t.shape[2]), 1.0);
  s.data = t.values;
  return s;
}

Tensor tensor_from_stack(const hm::HeatmapStack& s) {
  return Tensor::from({static_cast<std::size_t>(s.channels),
                       static_cast<std::size_t>(s.height),
                       static_cast<std::size_t>(s.width)},
                      s.data);
}

}  // namespace

int Graph::add_node(Tensor owned, bool requires_grad,
                    std::function<void(Graph&, int)> fn) {
  Node node;
  node.owned = std::move(owned);
  node.requires_grad = requires_grad;
  node.backward_fn = std::move(fn);
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

int Graph::add_result(Tensor value, std::initializer_list<Var> inputs,
                      std::function<void(Graph&, int)> fn) {
  bool needs = false;
  for (Var v : inputs) {
    if (v.valid() && nodes_[v.id].requires_grad) needs = true;
  }
  if (!needs) fn = nullptr;
  return add_node(std::move(value), needs, std::move(fn));
}

Tensor& Graph::ensure_grad(int id) {
  Node& node = nodes_[id];
  if (node.grad.values.empty()) {
    node.grad = Tensor::zeros(node.value().shape);
  }
  return node.grad;
}

bool Graph::needs_grad(Var v) const { return v.valid() && nodes_[v.id].requires_grad; }

Var Graph::external(const Tensor* values, bool requires_grad) {
  Node node;
  node.external = values;
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return {static_cast<int>(nodes_.size()) - 1};
}

Var Graph::constant(Tensor values) {
  return {add_node(std::move(values), false, nullptr)};
}

const Tensor& Graph::value(Var v) const { return nodes_[v.id].value(); }

bool Graph::has_grad(Var v) const { return !nodes_[v.id].grad.values.empty(); }

const Tensor& Graph::grad(Var v) const {
  if (!has_grad(v)) raise(ErrorCategory::contract, "gradient never reached this node");
  return nodes_[v.id].grad;
}

Tensor Graph::grad_or_zero(Var v) const {
  if (has_grad(v)) return nodes_[v.id].grad;
  return Tensor::zeros(nodes_[v.id].value().shape);
}

Tensor Graph::external_grad(const Tensor* storage) const {
  Tensor acc = Tensor::zeros(storage->shape);
  external_grad_into(storage, acc);
  return acc;
}

void Graph::external_grad_into(const Tensor* storage, Tensor& accumulator) const {
  for (const Node& node : nodes_) {
    if (node.external != storage || node.grad.values.empty()) continue;
    for (std::size_t i = 0; i < accumulator.numel(); ++i) {
      accumulator.values[i] += node.grad.values[i];
    }
  }
}

void Graph::backward(Var root) {
  if (!root.valid() || root.id >= static_cast<int>(nodes_.size())) {
    raise(ErrorCategory::contract, "backward on an invalid node");
  }
  if (val(root.id).numel() != 1) {
    raise(ErrorCategory::contract, "backward root must be scalar");
  }
  ensure_grad(root.id).values[0] += 1.0;
  for (int id = root.id; id >= 0; --id) {
    Node& node = nodes_[id];
    if (node.grad.values.empty() || !node.backward_fn) continue;
    node.backward_fn(*this, id);
  }
}

Var Graph::conv2d(Var xv, Var wv, Var bv, int stride) {
  const Tensor& x = val(xv.id);
  const Tensor& w = val(wv.id);
  const Tensor& b = val(bv.id);
  if (x.shape.size() != 3 || w.shape.size() != 4 || b.shape.size() != 1) {
    raise(ErrorCategory::contract, "conv2d expects x{C,H,W}, w{Co,Ci,K,K}, b{Co}");
  }
  const int ci = static_cast<int>(x.shape[0]);
  const int h = static_cast<int>(x.shape[1]);
  const int wd = static_cast<int>(x.shape[2]);
  const int co = static_cast<int>(w.shape[0]);
  const int k = static_cast<int>(w.shape[2]);
  if (static_cast<int>(w.shape[1]) != ci || static_cast<int>(w.shape[3]) != k ||
      static_cast<int>(b.shape[0]) != co) {
    raise(ErrorCategory::contract, "conv2d shape mismatch");
  }
  const int pad = k / 2;
  const int ho = (h + 2 * pad - k) / stride + 1;
  const int wo = (wd + 2 * pad - k) / stride + 1;
  if (ho <= 0 || wo <= 0) raise(ErrorCategory::contract, "conv2d output collapses");

  Tensor out = Tensor::zeros({static_cast<std::size_t>(co), static_cast<std::size_t>(ho),
                              static_cast<std::size_t>(wo)});
  const double* xp = x.values.data();
  const double* wp = w.values.data();
  double* op = out.values.data();
  for (int c = 0; c < co; ++c) {
    double bias = b.values[c];
    double* dst = op + static_cast<std::size_t>(c) * ho * wo;
    for (int i = 0; i < ho * wo; ++i) dst[i] = bias;
  }
  for (int c = 0; c < co; ++c) {
    for (int ic = 0; ic < ci; ++ic) {
      for (int ky = 0; ky < k; ++ky) {
        for (int kx = 0; kx < k; ++kx) {
          double wval = wp[((static_cast<std::size_t>(c) * ci + ic) * k + ky) * k + kx];
          if (wval == 0.0) continue;
          int lo = pad - kx;
          int ox_lo = lo > 0 ? (lo + stride - 1) / stride : 0;
          int ox_hi = std::min(wo - 1, (wd - 1 + pad - kx) / stride);
          for (int oy = 0; oy < ho; ++oy) {
            int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= h) continue;
            const double* __restrict row = xp + (static_cast<std::size_t>(ic) * h + iy) * wd;
            double* __restrict dst = op + (static_cast<std::size_t>(c) * ho + oy) * wo;
            int base = kx - pad;
            if (stride == 1) {
              for (int ox = ox_lo; ox <= ox_hi; ++ox) dst[ox] += wval * row[ox + base];
            } else {
              for (int ox = ox_lo; ox <= ox_hi; ++ox) dst[ox] += wval * row[ox * stride + base];
            }
          }
        }
      }
    }
  }

  int xid = xv.id, wid = wv.id, bid = bv.id;
  auto fn = [xid, wid, bid, ci, h, wd, co, k, pad, ho, wo, stride](Graph& g, int self) {
    const Tensor& gout = g.nodes_[self].grad;
    const Tensor& x = g.val(xid);
    const Tensor& w = g.val(wid);
    const double* gp = gout.values.data();
    const double* xp = x.values.data();
    const double* wp = w.values.data();

    if (g.nodes_[bid].requires_grad) {
      Tensor& gb = g.ensure_grad(bid);
      for (int c = 0; c < co; ++c) {
        const double* src = gp + static_cast<std::size_t>(c) * ho * wo;
        double acc = 0.0;
        for (int i = 0; i < ho * wo; ++i) acc += src[i];
        gb.values[c] += acc;
      }
    }
    bool want_w = g.nodes_[wid].requires_grad;
    bool want_x = g.nodes_[xid].requires_grad;
    Tensor* gw = want_w ? &g.ensure_grad(wid) : nullptr;
    Tensor* gx = want_x ? &g.ensure_grad(xid) : nullptr;
    for (int c = 0; c < co; ++c) {
      for (int ic = 0; ic < ci; ++ic) {
        for (int ky = 0; ky < k; ++ky) {
          for (int kx = 0; kx < k; ++kx) {
            std::size_t widx = ((static_cast<std::size_t>(c) * ci + ic) * k + ky) * k + kx;
            double wval = wp[widx];
            int lo = pad - kx;
            int ox_lo = lo > 0 ? (lo + stride - 1) / stride : 0;
            int ox_hi = std::min(wo - 1, (wd - 1 + pad - kx) / stride);
            double wacc = 0.0;
            int base = kx - pad;
            for (int oy = 0; oy < ho; ++oy) {
              int iy = oy * stride + ky - pad;
              if (iy < 0 || iy >= h) continue;
              const double* __restrict grow = gp + (static_cast<std::size_t>(c) * ho + oy) * wo;
              const double* __restrict xrow = xp + (static_cast<std::size_t>(ic) * h + iy) * wd;
              if (want_w) {
                if (stride == 1) {
                  for (int ox = ox_lo; ox <= ox_hi; ++ox) wacc += grow[ox] * xrow[ox + base];
                } else {
                  for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                    wacc += grow[ox] * xrow[ox * stride + base];
                  }
                }
              }
              if (want_x) {
                double* __restrict xgrow =
                    gx->values.data() + (static_cast<std::size_t>(ic) * h + iy) * wd;
                if (stride == 1) {
                  for (int ox = ox_lo; ox <= ox_hi; ++ox) xgrow[ox + base] += wval * grow[ox];
                } else {
                  for (int ox = ox_lo; ox <= ox_hi; ++ox) {
                    xgrow[ox * stride + base] += wval * grow[ox];
                  }
                }
              }
            }
            if (want_w) gw->values[widx] += wacc;
          }
        }
      }
    }
  };
  return {add_result(std::move(out), {xv, wv, bv}, std::move(fn))};
}

Var Graph::relu(Var xv) {
  const Tensor& x = val(xv.id);
  Tensor out = Tensor::zeros(x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) out.values[i] = x.values[i] > 0.0 ? x.values[i] : 0.0;
  int xid = xv.id;
  auto fn = [xid](Graph& g, int self) {
    if (!g.nodes_[xid].requires_grad) return;
    const Tensor& gout = g.nodes_[self].grad;
    const Tensor& x = g.val(xid);
    Tensor& gx = g.ensure_grad(xid);
    for (std::size_t i = 0; i < x.numel(); ++i) {
      if (x.values[i] > 0.0) gx.values[i] += gout.values[i];
    }
  };
  return {add_result(std::move(out), {xv}, std::move(fn))};
}

Var Graph::upsample_nearest2x(Var xv) {
  const Tensor& x = val(xv.id);
  if (x.shape.size() != 3) raise(ErrorCategory::contract, "upsample expects {C,H,W}");
  std::size_t c = x.shape[0], h = x.shape[1], w = x.shape[2];
  Tensor out = Tensor::zeros({c, h * 2, w * 2});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < 2 * h; ++y) {
      const double* row = &x.values[(ch * h + y / 2) * w];
      double* dst = &out.values[(ch * 2 * h + y) * 2 * w];
      for (std::size_t xx = 0; xx < 2 * w; ++xx) dst[xx] = row[xx / 2];
    }
  }
  int xid = xv.id;
  auto fn = [xid, c, h, w](Graph& g, int self) {
    if (!g.nodes_[xid].requires_grad) return;
    const Tensor& gout = g.nodes_[self].grad;
    Tensor& gx = g.ensure_grad(xid);
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t y = 0; y < 2 * h; ++y) {
        const double* src = &gout.values[(ch * 2 * h + y) * 2 * w];
        double* dst = &gx.values[(ch * h + y / 2) * w];
        for (std::size_t xx = 0; xx < 2 * w; ++xx) dst[xx / 2] += src[xx];
      }
    }
  };
  return {add_result(std::move(out), {xv}, std::move(fn))};
}

Var Graph::global_avg_pool(Var xv) {
  const Tensor& x = val(xv.id);
  if (x.shape.size() != 3) raise(ErrorCategory::contract, "pool expects {C,H,W}");
  std::size_t c = x.shape[0], n = x.shape[1] * x.shape[2];
  Tensor out = Tensor::zeros({c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x.values[ch * n + i];
    out.values[ch] = acc / static_cast<double>(n);
  }
  int xid = xv.id;
  auto fn = [xid, c, n](Graph& g, int self) {
    if (!g.nodes_[xid].requires_grad) return;
    const Tensor& gout = g.nodes_[self].grad;
    Tensor& gx = g.ensure_grad(xid);
    double inv = 1.0 / static_cast<double>(n);
    for (std::size_t ch = 0; ch < c; ++ch) {
      double gval = gout.values[ch] * inv;
      for (std::size_t i = 0; i < n; ++i) gx.values[ch * n + i] += gval;
    }
  };
  return {add_result(std::move(out), {xv}, std::move(fn))};
}

Var Graph::affine(Var xv, Var wv, Var bv) {
  const Tensor& x = val(xv.id);
  const Tensor& w = val(wv.id);
  const Tensor& b = val(bv.id);
  if (x.shape.size() != 1 || w.shape.size() != 2 || b.shape.size() != 1 ||
      w.shape[1] != x.shape[0] || w.shape[0] != b.shape[0]) {
    raise(ErrorCategory::contract, "affine expects x{I}, w{O,I}, b{O}");
  }
  std::size_t in = x.shape[0], outn = w.shape[0];
  Tensor out = Tensor::zeros({outn});
  for (std::size_t o = 0; o < outn; ++o) {
    double acc = b.values[o];
    const double* row = &w.values[o * in];
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x.values[i];
    out.values[o] = acc;
  }
  int xid = xv.id, wid = wv.id, bid = bv.id;
  auto fn = [xid, wid, bid, in, outn](Graph& g, int self) {
    const Tensor& gout = g.nodes_[self].grad;
    const Tensor& x = g.val(xid);
    const Tensor& w = g.val(wid);
    if (g.nodes_[bid].requires_grad) {
      Tensor& gb = g.ensure_grad(bid);
      for (std::size_t o = 0; o < outn; ++o) gb.values[o] += gout.values[o];
    }
    if (g.nodes_[wid].requires_grad) {
      Tensor& gw = g.ensure_grad(wid);
      for (std::size_t o = 0; o < outn; ++o) {
        double gval = gout.values[o];
        double* row = &gw.values[o * in];
        for (std::size_t i = 0; i < in; ++i) row[i] += gval * x.values[i];
      }
    }
    if (g.nodes_[xid].requires_grad) {
      Tensor& gx = g.ensure_grad(xid);
      for (std::size_t o = 0; o < outn; ++o) {
        double gval = gout.values[o];
        const double* row = &w.values[o * in];
        for (std::size_t i = 0; i < in; ++i) gx.values[i] += gval * row[i];
      }
    }
  };
  return {add_result(std::move(out), {xv, wv, bv}, std::move(fn))};
}

Var Graph::softplus(Var xv) {
  const Tensor& x = val(xv.id);
  Tensor out = Tensor::zeros(x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) {
    double v = x.values[i];
    out.values[i] = v > 30.0 ? v : std::log1p(std::exp(v));
  }
  int xid = xv.id;
  auto fn = [xid](Graph& g, int self) {
    if (!g.nodes_[xid].requires_grad) return;
    const Tensor& gout = g.nodes_[self].grad;
    const Tensor& x = g.val(xid);
    Tensor& gx = g.ensure_grad(xid);
    for (std::size_t i = 0; i < x.numel(); ++i) {
      double s = 1.0 / (1.0 + std::exp(-x.values[i]));
      gx.values[i] += gout.values[i] * s;
    }
  };
  return {add_result(std::move(out), {xv}, std::move(fn))};
}

Var Graph::offset(Var xv, double c) {
  const Tensor& x = val(xv.id);
  Tensor out = x;
  for (double& v : out.values) v += c;
  int xid = xv.id;
  auto fn = [xid](Graph& g, int self) {
    if (!g.nodes_[xid].requires_grad) return;
    const Tensor& gout = g.nodes_[self].grad;
    Tensor& gx = g.ensure_grad(xid);
    for (std::size_t i = 0; i < gout.numel(); ++i) gx.values[i] += gout.values[i];
  };
  return {add_result(std::move(out), {xv}, std::move(fn))};
}

Var Graph::spatial_softmax(Var logitsv) {
  hm::HeatmapStack normalized = hm::spatial_softmax(stack_from_tensor(val(logitsv.id)));
  Tensor out = tensor_from_stack(normalized);
  int xid = logitsv.id;
  auto fn = [xid](Graph& g, int self) {
    if (!g.nodes_[xid].requires_grad) return;
    hm::HeatmapStack normalized = stack_from_tensor(g.val(self));
    hm::HeatmapStack gout = stack_from_tensor(g.nodes_[self].grad);
    hm::HeatmapStack gin = hm::spatial_softmax_backward(normalized, gout);
    Tensor& gx = g.ensure_grad(xid);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx.values[i] += gin.data[i];
  };
  return {add_result(std::move(out), {logitsv}, std::move(fn))};
}

Var Graph::soft_argmax(Var normalizedv, double scale) {
  hm::HeatmapStack stack = stack_from_tensor(val(normalizedv.id));
  stack.scale = scale;
  std::vector<geom::Point> points = hm::soft_argmax(stack);
  Tensor out = Tensor::zeros({points.size(), 2});
  for (std::size_t c = 0; c < points.size(); ++c) {
    out.values[c * 2] = points[c].x;
    out.values[c * 2 + 1] = points[c].y;
  }
  int xid = normalizedv.id;
  auto fn = [xid, scale](Graph& g, int self) {
    if (!g.nodes_[xid].requires_grad) return;
    const Tensor& gout = g.nodes_[self].grad;
    hm::HeatmapStack stack = stack_from_tensor(g.val(xid));
    stack.scale = scale;
    std::vector<geom::Point> gp(gout.shape[0]);
    for (std::size_t c = 0; c < gp.size(); ++c) {
      gp[c] = {gout.values[c * 2], gout.values[c * 2 + 1]};
    }
    hm::HeatmapStack gin = hm::soft_argmax_backward(stack, gp);
    Tensor& gx = g.ensure_grad(xid);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx.values[i] += gin.data[i];
  };
  return {add_result(std::move(out), {normalizedv}, std::move(fn))};
}

Var Graph::heatmap_l1(Var predv, const hm::HeatmapStack& target) {
  hm::HeatmapStack pred = stack_from_tensor(val(predv.id));
  hm::HeatmapLossResult l1 = hm::heatmap_loss(pred, target);
  Tensor out = Tensor::scalar(l1.value);
  int xid = predv.id;
  // Keep only the sign grid; target is not needed again in backward.
  auto grad = std::make_shared<hm::HeatmapStack>(std::move(l1.grad_pred_normalized));
  auto fn = [xid, grad](Graph& g, int self) {
    if (!g.nodes_[xid].requires_grad) return;
    double gscale = g.nodes_[self].grad.values[0];
    Tensor& gx = g.ensure_grad(xid);
    for (std::size_t i = 0; i < gx.numel(); ++i) gx.values[i] += gscale * grad->data[i];
  };
  return {add_result(std::move(out), {predv}, std::move(fn))};
}

Var Graph::reconstruct_gaze(Var pointsv, Var radiusv) {
  const Tensor& pts = val(pointsv.id);
  const Tensor& rad = val(radiusv.id);
  if (pts.shape.size() != 2 || pts.shape[0] < 2 || pts.shape[1] != 2 || rad.numel() != 1) {
    raise(ErrorCategory::contract, "reconstruct expects points{C,2} and radius{1}");
  }
  geom::Point iris{pts.values[0], pts.values[1]};
  geom::Point center{pts.values[2], pts.values[3]};
  geom::ReconResult recon = geom::reconstruct_gaze(iris, center, rad.values[0]);
  Tensor out = Tensor::from({2}, {recon.angles.theta, recon.angles.phi});
  int pid = pointsv.id, rid = radiusv.id;
  auto fn = [pid, rid](Graph& g, int self) {
    const Tensor& gout = g.nodes_[self].grad;
    const Tensor& pts = g.val(pid);
    double radius = g.val(rid).values[0];
    geom::ReconJacobian jac = geom::recon_jacobian({pts.values[0], pts.values[1]},
                                                   {pts.values[2], pts.values[3]}, radius);
    double gt = gout.values[0], gph = gout.values[1];
    if (g.nodes_[pid].requires_grad) {
      Tensor& gp = g.ensure_grad(pid);
      for (int col = 0; col < 4; ++col) {
        gp.values[col] += gt * jac[0][col] + gph * jac[1][col];
      }
    }
    if (g.nodes_[rid].requires_grad) {
      g.ensure_grad(rid).values[0] += gt * jac[0][4] + gph * jac[1][4];
    }
  };
  return {add_result(std::move(out), {pointsv, radiusv}, std::move(fn))};
}

Var Graph::abs_diff(Var xv, Tensor target) {
  const Tensor& x = val(xv.id);
  if (!x.same_shape(target)) raise(ErrorCategory::contract, "abs_diff shape mismatch");
  Tensor out = Tensor::zeros(x.shape);
  for (std::size_t i = 0; i < x.numel(); ++i) out.values[i] = std::abs(x.values[i] - target.values[i]);
  int xid = xv.id;
  auto shared_target = std::make_shared<Tensor>(std::move(target));
  auto fn = [xid, shared_target](Graph& g, int self) {
    if (!g.nodes_[xid].requires_grad) return;
    const Tensor& gout = g.nodes_[self].grad;
    const Tensor& x = g.val(xid);
    Tensor& gx = g.ensure_grad(xid);
    for (std::size_t i = 0; i < x.numel(); ++i) {
      double d = x.values[i] - shared_target->values[i];
      double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      gx.values[i] += s * gout.values[i];
    }
  };
  return {add_result(std::move(out), {xv}, std::move(fn))};
}

Var Graph::sum(Var xv) {
  const Tensor& x = val(xv.id);
  double acc = 0.0;
  for (double v : x.values) acc += v;
  int xid = xv.id;
  auto fn = [xid](Graph& g, int self) {
    if (!g.nodes_[xid].requires_grad) return;
    double gval = g.nodes_[self].grad.values[0];
    Tensor& gx = g.ensure_grad(xid);
    for (double& v : gx.values) v += gval;
  };
  return {add_result(Tensor::scalar(acc), {xv}, std::move(fn))};
}

Var Graph::uncertainty_loss(Var residualsv, Var alphav) {
  const Tensor& res = val(residualsv.id);
  const Tensor& alpha = val(alphav.id);
  if (res.numel() != 2 || alpha.numel() != 2) {
    raise(ErrorCategory::contract, "uncertainty loss expects two components");
  }
  loss::UncertaintyLossResult um = loss::uncertainty_gaze_loss(
      {res.values[0], res.values[1]}, {alpha.values[0], alpha.values[1]});
  int ridv = residualsv.id, aid = alphav.id;
  auto fn = [ridv, aid](Graph& g, int self) {
    double gval = g.nodes_[self].grad.values[0];
    const Tensor& res = g.val(ridv);
    const Tensor& alpha = g.val(aid);
    loss::UncertaintyLossResult um = loss::uncertainty_gaze_loss(
        {res.values[0], res.values[1]}, {alpha.values[0], alpha.values[1]});
    if (g.nodes_[ridv].requires_grad) {
      Tensor& gr = g.ensure_grad(ridv);
      gr.values[0] += gval * um.grad_residual[0];
      gr.values[1] += gval * um.grad_residual[1];
    }
    if (g.nodes_[aid].requires_grad) {
      Tensor& ga = g.ensure_grad(aid);
      ga.values[0] += gval * um.grad_alpha[0];
      ga.values[1] += gval * um.grad_alpha[1];
    }
  };
  return {add_result(Tensor::scalar(um.value), {residualsv, alphav}, std::move(fn))};
}

Var Graph::weighted_sum(std::initializer_list<std::pair<Var, double>> terms) {
  return weighted_sum(std::vector<std::pair<Var, double>>(terms));
}

Var Graph::weighted_sum(const std::vector<std::pair<Var, double>>& terms) {
  double acc = 0.0;
  std::vector<std::pair<int, double>> ids;
  bool needs = false;
  for (const auto& [v, c] : terms) {
    if (!v.valid()) continue;
    if (val(v.id).numel() != 1) {
      raise(ErrorCategory::contract, "weighted_sum expects scalar terms");
    }
    acc += c * val(v.id).values[0];
    ids.emplace_back(v.id, c);
    needs = needs || nodes_[v.id].requires_grad;
  }
  std::function<void(Graph&, int)> fn;
  if (needs) {
    fn = [ids](Graph& g, int self) {
      double gval = g.nodes_[self].grad.values[0];
      for (const auto& [id, c] : ids) {
        if (g.nodes_[id].requires_grad) g.ensure_grad(id).values[0] += gval * c;
      }
    };
  }
  return {add_node(Tensor::scalar(acc), needs, std::move(fn))};
}

}  // namespace hgn::net
