#pragma once

#include <cmath>
#include <vector>

#include "logiclab/graph.hpp"

namespace logiclab {

// AdamW with decoupled weight decay over a fixed parameter registry.
// Weight decay skips 1-row parameters (biases, layernorm gains, scalar-mix
// logits), following the usual transformer recipe.
template <typename S>
class AdamWT {
 public:
  using Var = VarT<S>;
  using Mat = typename NodeT<S>::Mat;

  AdamWT(std::vector<Var> params, double lr, double beta1, double beta2, double eps,
         double weight_decay)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        weight_decay_(weight_decay) {
    for (auto& p : params_) {
      m_.push_back(Mat::Zero(p->val.rows(), p->val.cols()));
      v_.push_back(Mat::Zero(p->val.rows(), p->val.cols()));
    }
  }

  // Global gradient norm across the registry (before clipping).
  double grad_norm() const {
    double sq = 0;
    for (auto& p : params_) sq += double(p->grad.squaredNorm());
    return std::sqrt(sq);
  }

  void clip(double max_norm) {
    if (max_norm <= 0) return;
    double norm = grad_norm();
    if (norm > max_norm) {
      S s = S(max_norm / norm);
      for (auto& p : params_) p->grad *= s;
    }
  }

  // lr_scale implements the schedule (warmup/decay) on top of the base lr.
  void step(double lr_scale = 1.0) {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, t_);
    double bc2 = 1.0 - std::pow(beta2_, t_);
    double lr = lr_ * lr_scale;
    for (size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      m_[i] = S(beta1_) * m_[i] + S(1 - beta1_) * p->grad;
      v_[i] = (S(beta2_) * v_[i].array() + S(1 - beta2_) * p->grad.array().square()).matrix();
      auto mhat = m_[i].array() / S(bc1);
      auto vhat = v_[i].array() / S(bc2);
      p->val.array() -= S(lr) * (mhat / (vhat.sqrt() + S(eps_)));
      if (weight_decay_ > 0 && p->val.rows() > 1)
        p->val *= S(1.0 - lr * weight_decay_);
    }
  }

 private:
  std::vector<Var> params_;
  std::vector<Mat> m_, v_;
  double lr_, beta1_, beta2_, eps_, weight_decay_;
  long t_ = 0;
};

// Linear warmup to 1, then linear decay to 0 at total_steps.
inline double lr_schedule(int step, int warmup, int total_steps) {
  if (warmup > 0 && step < warmup) return double(step + 1) / warmup;
  if (total_steps <= warmup) return 1.0;
  return std::max(0.0, double(total_steps - step) / double(total_steps - warmup));
}

}  // namespace logiclab
