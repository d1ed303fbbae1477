#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "logiclab/rng.hpp"

namespace logiclab {

// Small reverse-mode autograd over dense matrices. Templated on the scalar:
// training runs in float, the finite-difference gradient check instantiates
// the same code in double.
template <typename S>
struct NodeT {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  Mat val;
  Mat grad;
  bool requires_grad = false;
  std::function<void()> back;  // empty for leaves

  void ensure_grad() {
    if (grad.rows() != val.rows() || grad.cols() != val.cols())
      grad = Mat::Zero(val.rows(), val.cols());
  }
};

template <typename S>
using VarT = std::shared_ptr<NodeT<S>>;

template <typename S>
class GraphT {
 public:
  using Node = NodeT<S>;
  using Var = VarT<S>;
  using Mat = typename Node::Mat;

  static Var leaf(Mat value, bool requires_grad = false) {
    auto n = std::make_shared<Node>();
    n->val = std::move(value);
    n->requires_grad = requires_grad;
    if (requires_grad) n->ensure_grad();
    return n;
  }

  Var constant(Mat value) { return leaf(std::move(value), false); }

  Var matmul(Var a, Var b) {
    return make({a, b}, a->val * b->val, [a, b](Node& out) {
      if (a->requires_grad) a->grad.noalias() += out.grad * b->val.transpose();
      if (b->requires_grad) b->grad.noalias() += a->val.transpose() * out.grad;
    });
  }

  // a * b^T
  Var matmul_nt(Var a, Var b) {
    return make({a, b}, a->val * b->val.transpose(), [a, b](Node& out) {
      if (a->requires_grad) a->grad.noalias() += out.grad * b->val;
      if (b->requires_grad) b->grad.noalias() += out.grad.transpose() * a->val;
    });
  }

  Var add(Var a, Var b) {
    return make({a, b}, a->val + b->val, [a, b](Node& out) {
      if (a->requires_grad) a->grad += out.grad;
      if (b->requires_grad) b->grad += out.grad;
    });
  }

  // Adds a 1 x n row vector to every row of a.
  Var add_row(Var a, Var row) {
    Mat v = a->val;
    v.rowwise() += Eigen::Matrix<S, 1, Eigen::Dynamic>(row->val.row(0));
    return make({a, row}, std::move(v), [a, row](Node& out) {
      if (a->requires_grad) a->grad += out.grad;
      if (row->requires_grad) row->grad.row(0) += out.grad.colwise().sum();
    });
  }

  Var scale(Var a, S s) {
    return make({a}, a->val * s, [a, s](Node& out) {
      if (a->requires_grad) a->grad += out.grad * s;
    });
  }

  Var transpose(Var a) {
    return make({a}, a->val.transpose(), [a](Node& out) {
      if (a->requires_grad) a->grad += out.grad.transpose();
    });
  }

  Var rows(Var a, int begin, int n) {
    return make({a}, a->val.middleRows(begin, n), [a, begin, n](Node& out) {
      if (a->requires_grad) a->grad.middleRows(begin, n) += out.grad;
    });
  }

  Var cols(Var a, int begin, int n) {
    return make({a}, a->val.middleCols(begin, n), [a, begin, n](Node& out) {
      if (a->requires_grad) a->grad.middleCols(begin, n) += out.grad;
    });
  }

  Var hcat(const std::vector<Var>& parts) {
    Eigen::Index rows = parts.front()->val.rows(), total = 0;
    for (auto& p : parts) total += p->val.cols();
    Mat v(rows, total);
    Eigen::Index off = 0;
    for (auto& p : parts) {
      v.middleCols(off, p->val.cols()) = p->val;
      off += p->val.cols();
    }
    return make(parts, std::move(v), [parts](Node& out) {
      Eigen::Index off = 0;
      for (auto& p : parts) {
        if (p->requires_grad) p->grad += out.grad.middleCols(off, p->val.cols());
        off += p->val.cols();
      }
    });
  }

  // Row-wise softmax; `mask` (optional, same shape) is added to the input
  // first (use large negatives to exclude positions).
  Var softmax_rows(Var a, const Mat* mask = nullptr) {
    Mat z = a->val;
    if (mask) z += *mask;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      S m = z.row(i).maxCoeff();
      z.row(i) = (z.row(i).array() - m).exp();
      z.row(i) /= z.row(i).sum();
    }
    return make({a}, std::move(z), [a](Node& out) {
      if (!a->requires_grad) return;
      for (Eigen::Index i = 0; i < out.val.rows(); ++i) {
        S dot = out.grad.row(i).dot(out.val.row(i));
        a->grad.row(i).array() +=
            out.val.row(i).array() * (out.grad.row(i).array() - dot);
      }
    });
  }

  // Per-row layer norm with learnable gain/bias (1 x d each).
  Var layernorm(Var a, Var gain, Var bias) {
    constexpr S eps = S(1e-5);
    Eigen::Index n = a->val.rows(), d = a->val.cols();
    Mat xhat(n, d);
    auto inv_std = std::make_shared<std::vector<S>>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      S mean = a->val.row(i).mean();
      auto centered = a->val.row(i).array() - mean;
      S var = centered.square().sum() / S(d);
      S istd = S(1) / std::sqrt(var + eps);
      (*inv_std)[i] = istd;
      xhat.row(i) = centered * istd;
    }
    Mat v(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
      v.row(i) = xhat.row(i).cwiseProduct(gain->val.row(0)) + bias->val.row(0);
    auto xh = std::make_shared<Mat>(std::move(xhat));
    return make({a, gain, bias}, std::move(v), [a, gain, bias, xh, inv_std](Node& out) {
      Eigen::Index n = out.val.rows(), d = out.val.cols();
      if (gain->requires_grad)
        gain->grad.row(0) += (out.grad.array() * xh->array()).colwise().sum().matrix();
      if (bias->requires_grad) bias->grad.row(0) += out.grad.colwise().sum();
      if (!a->requires_grad) return;
      for (Eigen::Index i = 0; i < n; ++i) {
        auto dy = (out.grad.row(i).cwiseProduct(gain->val.row(0))).array();
        auto x = xh->row(i).array();
        S mean_dy = dy.sum() / S(d);
        S mean_dyx = (dy * x).sum() / S(d);
        a->grad.row(i).array() += (*inv_std)[i] * (dy - mean_dy - x * mean_dyx);
      }
    });
  }

  // GPT-2 tanh approximation of GELU.
  Var gelu(Var a) {
    const S c = S(std::sqrt(2.0 / M_PI));
    Mat v = a->val.unaryExpr([c](S x) {
      return S(0.5) * x * (S(1) + std::tanh(c * (x + S(0.044715) * x * x * x)));
    });
    return make({a}, std::move(v), [a, c](Node& out) {
      if (!a->requires_grad) return;
      a->grad.array() += out.grad.array() * a->val.unaryExpr([c](S x) {
        S t = std::tanh(c * (x + S(0.044715) * x * x * x));
        S dt = (S(1) - t * t) * c * (S(1) + S(0.134145) * x * x);
        return S(0.5) * (S(1) + t) + S(0.5) * x * dt;
      }).array();
    });
  }

  // Gathers embedding rows by id; gradient scatter-adds back.
  Var embedding(Var table, const std::vector<int>& ids) {
    Mat v(static_cast<Eigen::Index>(ids.size()), table->val.cols());
    for (size_t i = 0; i < ids.size(); ++i) v.row(i) = table->val.row(ids[i]);
    return make({table}, std::move(v), [table, ids](Node& out) {
      if (!table->requires_grad) return;
      for (size_t i = 0; i < ids.size(); ++i)
        table->grad.row(ids[i]) += out.grad.row(static_cast<Eigen::Index>(i));
    });
  }

  Var mean_rows(Var a) {
    Mat v = a->val.colwise().mean();
    return make({a}, std::move(v), [a](Node& out) {
      if (a->requires_grad)
        a->grad.rowwise() +=
            (out.grad.row(0) / S(a->val.rows())).eval();
    });
  }

  // Softmax-weighted sum over layer matrices (all n x d); logits is
  // (L x 1). Gradient flows into the logits only: the layers are frozen
  // encoder outputs.
  Var scalar_mix(const std::vector<Mat>& layers, Var logits) {
    Eigen::Index L = logits->val.rows();
    if (static_cast<size_t>(L) != layers.size())
      throw std::invalid_argument("scalar_mix: logits/layers size mismatch");
    Eigen::Array<S, Eigen::Dynamic, 1> w = logits->val.col(0).array();
    w = (w - w.maxCoeff()).exp();
    w /= w.sum();
    Mat v = Mat::Zero(layers[0].rows(), layers[0].cols());
    for (Eigen::Index i = 0; i < L; ++i) v += w[i] * layers[i];
    auto weights = std::make_shared<Eigen::Array<S, Eigen::Dynamic, 1>>(std::move(w));
    auto layers_copy = std::make_shared<std::vector<Mat>>(layers);
    return make({logits}, std::move(v), [logits, weights, layers_copy](Node& out) {
      if (!logits->requires_grad) return;
      Eigen::Index L = logits->val.rows();
      Eigen::Array<S, Eigen::Dynamic, 1> dw(L);
      for (Eigen::Index i = 0; i < L; ++i)
        dw[i] = (out.grad.array() * (*layers_copy)[i].array()).sum();
      S dot = (dw * (*weights)).sum();
      logits->grad.col(0).array() += (*weights) * (dw - dot);
    });
  }

  // Mean cross entropy of row-wise softmax(logits) against targets, over the
  // rows flagged in `select` (all rows when empty). Returns a 1x1 node.
  Var cross_entropy(Var logits, const std::vector<int>& targets,
                    const std::vector<uint8_t>& select = {}) {
    Eigen::Index n = logits->val.rows();
    auto probs = std::make_shared<Mat>(logits->val);
    int n_sel = 0;
    S loss = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!select.empty() && !select[i]) continue;
      S m = probs->row(i).maxCoeff();
      probs->row(i) = (probs->row(i).array() - m).exp();
      probs->row(i) /= probs->row(i).sum();
      loss -= std::log(std::max((*probs)(i, targets[i]), S(1e-30)));
      n_sel++;
    }
    if (n_sel == 0) throw std::invalid_argument("cross_entropy: nothing to predict");
    Mat v(1, 1);
    v(0, 0) = loss / S(n_sel);
    return make({logits}, std::move(v),
                [logits, probs, targets, select, n_sel](Node& out) {
      if (!logits->requires_grad) return;
      S scale = out.grad(0, 0) / S(n_sel);
      for (Eigen::Index i = 0; i < logits->val.rows(); ++i) {
        if (!select.empty() && !select[i]) continue;
        logits->grad.row(i) += scale * probs->row(i);
        logits->grad(i, targets[i]) -= scale;
      }
    });
  }

  // Binary cross entropy with a 1x1 logit.
  Var bce_with_logit(Var logit, bool label) {
    S z = logit->val(0, 0);
    S p = S(1) / (S(1) + std::exp(-z));
    Mat v(1, 1);
    v(0, 0) = label ? -std::log(std::max(p, S(1e-30)))
                    : -std::log(std::max(S(1) - p, S(1e-30)));
    return make({logit}, std::move(v), [logit, p, label](Node& out) {
      if (logit->requires_grad)
        logit->grad(0, 0) += out.grad(0, 0) * (p - (label ? S(1) : S(0)));
    });
  }

  // Inverted dropout; identity when rate == 0.
  Var dropout(Var a, S rate, Rng& rng) {
    if (rate <= S(0)) return a;
    Mat mask(a->val.rows(), a->val.cols());
    S keep = S(1) - rate;
    for (Eigen::Index i = 0; i < mask.size(); ++i)
      mask.data()[i] = rng.uniform() < double(rate) ? S(0) : S(1) / keep;
    auto m = std::make_shared<Mat>(std::move(mask));
    return make({a}, (a->val.array() * m->array()).matrix(), [a, m](Node& out) {
      if (a->requires_grad) a->grad.array() += out.grad.array() * m->array();
    });
  }

  // Runs reverse-mode accumulation from `root` (must be 1x1). `seed` scales
  // the contribution, e.g. 1/batch when averaging per-sequence losses.
  void backward(Var root, S seed = S(1)) {
    root->ensure_grad();
    root->grad.setConstant(seed);
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it)
      if ((*it)->back) (*it)->back();
  }

  size_t size() const { return tape_.size(); }

 private:
  Var make(std::vector<Var> parents, Mat value, std::function<void(Node&)> grad_fn) {
    auto n = std::make_shared<Node>();
    n->val = std::move(value);
    for (auto& p : parents)
      if (p->requires_grad) n->requires_grad = true;
    if (n->requires_grad) {
      n->ensure_grad();
      for (auto& p : parents) p->ensure_grad();
      // grad_fn closes over parents; reads out.grad via the bound node.
      Node* raw = n.get();
      n->back = [raw, fn = std::move(grad_fn)]() { fn(*raw); };
      tape_.push_back(n);
    }
    return n;
  }

  std::vector<Var> tape_;
};

}  // namespace logiclab
