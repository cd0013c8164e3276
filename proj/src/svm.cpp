#include "graspxfer/svm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

namespace gx {

double SvmModel::decision(const VecX& x) const {
  double f = bias;
  for (size_t i = 0; i < support_vectors.size(); ++i)
    f += coefficients[i] *
         std::exp(-gamma * (x - support_vectors[i]).squaredNorm());
  return f;
}

namespace {

// FIFO-bounded kernel row cache.
class KernelCache {
 public:
  KernelCache(const std::vector<VecX>& xs, double gamma, size_t budget_bytes)
      : xs_(xs), gamma_(gamma) {
    size_t row_bytes = sizeof(double) * xs.size();
    max_rows_ = std::max<size_t>(4, budget_bytes / std::max<size_t>(1, row_bytes));
  }

  const std::vector<double>& row(int i) {
    auto it = rows_.find(i);
    if (it != rows_.end()) return it->second;
    if (rows_.size() >= max_rows_) {
      rows_.erase(fifo_.front());
      fifo_.pop_front();
    }
    std::vector<double> r(xs_.size());
    for (size_t j = 0; j < xs_.size(); ++j)
      r[j] = std::exp(-gamma_ * (xs_[i] - xs_[j]).squaredNorm());
    fifo_.push_back(i);
    return rows_.emplace(i, std::move(r)).first->second;
  }

 private:
  const std::vector<VecX>& xs_;
  double gamma_;
  size_t max_rows_;
  std::unordered_map<int, std::vector<double>> rows_;
  std::deque<int> fifo_;
};

}  // namespace

SvmModel svm_train(const std::vector<VecX>& xs, const std::vector<int>& ys,
                   const SvmParams& params) {
  const int n = static_cast<int>(xs.size());
  if (n == 0) throw InvalidArgument("svm_train: empty training set");
  if (xs.size() != ys.size())
    throw InvalidArgument("svm_train: label count mismatch");
  bool has_pos = false, has_neg = false;
  for (int y : ys) {
    if (y > 0) has_pos = true;
    else has_neg = true;
  }
  if (!has_pos || !has_neg)
    throw InvalidArgument("svm_train: both classes required");

  const double C = params.C;
  const double gamma =
      params.gamma > 0.0 ? params.gamma : 1.0 / double(xs[0].size());
  KernelCache cache(xs, gamma, params.cache_bytes);

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // d(dual)/d(alpha_i)
  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = ys[i] > 0 ? 1.0 : -1.0;

  auto in_up = [&](int t) {
    return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
  };
  auto in_low = [&](int t) {
    return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
  };

  long iter = 0;
  double m_val = 0.0, M_val = 0.0;
  while (iter++ < params.max_iter) {
    // Max-violating pair.
    int i = -1, j = -1;
    m_val = -std::numeric_limits<double>::max();
    M_val = std::numeric_limits<double>::max();
    for (int t = 0; t < n; ++t) {
      double v = -y[t] * grad[t];
      if (in_up(t) && v > m_val) {
        m_val = v;
        i = t;
      }
      if (in_low(t) && v < M_val) {
        M_val = v;
        j = t;
      }
    }
    if (i < 0 || j < 0 || m_val - M_val < params.tol) break;

    const std::vector<double>& Ki = cache.row(i);
    const std::vector<double>& Kj = cache.row(j);
    double quad = Ki[i] + Kj[j] - 2.0 * Ki[j];
    if (quad <= 1e-12) quad = 1e-12;
    // Working pair update in the (alpha_i, alpha_j) plane.
    double delta = (m_val - M_val) / quad;
    double old_ai = alpha[i], old_aj = alpha[j];
    if (y[i] > 0)
      alpha[i] += delta;
    else
      alpha[i] -= delta;
    if (y[j] > 0)
      alpha[j] -= delta;
    else
      alpha[j] += delta;
    // Clip to the box while keeping the equality constraint.
    double sum = y[i] * old_ai + y[j] * old_aj;
    alpha[i] = std::clamp(alpha[i], 0.0, C);
    alpha[j] = y[j] * (sum - y[i] * alpha[i]);
    alpha[j] = std::clamp(alpha[j], 0.0, C);
    alpha[i] = y[i] * (sum - y[j] * alpha[j]);
    alpha[i] = std::clamp(alpha[i], 0.0, C);

    double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    if (std::abs(dai) < 1e-15 && std::abs(daj) < 1e-15) break;
    for (int t = 0; t < n; ++t)
      grad[t] += y[t] * (y[i] * dai * Ki[t] + y[j] * daj * Kj[t]);
  }

  // Bias from free support vectors; midpoint of the violating bounds
  // otherwise.
  double rho;
  double sum_free = 0.0;
  int n_free = 0;
  for (int t = 0; t < n; ++t)
    if (alpha[t] > 1e-12 && alpha[t] < C - 1e-12) {
      sum_free += y[t] * grad[t];
      ++n_free;
    }
  if (n_free > 0)
    rho = sum_free / n_free;
  else
    rho = -(m_val + M_val) / 2.0;

  SvmModel model;
  model.gamma = gamma;
  model.bias = -rho;
  for (int t = 0; t < n; ++t) {
    if (alpha[t] > 1e-12) {
      model.support_vectors.push_back(xs[t]);
      model.coefficients.push_back(alpha[t] * y[t]);
      model.sv_indices.push_back(t);
    }
  }
  return model;
}

}  // namespace gx
