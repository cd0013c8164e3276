#pragma once

#include <vector>

#include "graspxfer/common.hpp"

namespace gx {

struct SvmParams {
  double C = 10.0;
  double gamma = -1.0;  // <= 0: 1 / dimension
  double tol = 1e-3;
  long max_iter = 2000000;
  size_t cache_bytes = 256ull << 20;
};

// RBF-kernel C-SVM. decision(x) = sum_i coef_i exp(-gamma |x - sv_i|^2) + bias,
// coef_i = alpha_i y_i; sign predicts the label.
struct SvmModel {
  std::vector<VecX> support_vectors;
  std::vector<double> coefficients;
  double bias = 0.0;
  double gamma = 0.0;
  std::vector<int> sv_indices;  // into the training set

  double decision(const VecX& x) const;
};

// Dual SMO with max-violating-pair selection, run to `tol`. labels are +1/-1;
// both classes must be present (InvalidArgument otherwise).
SvmModel svm_train(const std::vector<VecX>& xs, const std::vector<int>& ys,
                   const SvmParams& params = {});

}  // namespace gx
