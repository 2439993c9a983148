// Plain Adam with bias correction; state and updates are fully deterministic.
#pragma once

#include <cmath>
#include <vector>

namespace padland::rl {

class Adam {
 public:
  Adam(std::size_t paramCount, double learningRate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8)
      : lr_(learningRate), beta1_(beta1), beta2_(beta2), eps_(epsilon),
        m_(paramCount, 0.0), v_(paramCount, 0.0) {}

  void setLearningRate(double lr) { lr_ = lr; }

  void step(std::vector<double>& params, const std::vector<double>& grads) {
    t_ += 1;
    const double correction1 = 1.0 - std::pow(beta1_, t_);
    const double correction2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
      const double mHat = m_[i] / correction1;
      const double vHat = v_[i] / correction2;
      params[i] -= lr_ * mHat / (std::sqrt(vHat) + eps_);
    }
  }

 private:
  double lr_;
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace padland::rl
