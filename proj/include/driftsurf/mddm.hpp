#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace driftsurf {

// Weighting over the sliding window, increasing toward the most recent slot.
struct MddmScheme {
  enum class Kind { arithmetic, geometric, euler };

  Kind kind = Kind::geometric;
  double param = 1.01;  // slope d, ratio r, or exponent lambda

  static MddmScheme arithmetic(double d = 0.01) {
    return {Kind::arithmetic, d};
  }
  static MddmScheme geometric(double r = 1.01) { return {Kind::geometric, r}; }
  static MddmScheme euler(double lambda = 0.01) {
    return {Kind::euler, lambda};
  }

  double weight(std::size_t i) const {  // i = 1..n, most recent = n
    switch (kind) {
      case Kind::arithmetic:
        return 1.0 + static_cast<double>(i - 1) * param;
      case Kind::geometric:
        return std::pow(param, static_cast<double>(i - 1));
      case Kind::euler:
        return std::exp(param * static_cast<double>(i - 1));
    }
    return 1.0;
  }
};

// Sliding-window detector over per-point prediction correctness. Once the
// window is full it signals a drift whenever the weighted mean of the window
// falls below the best weighted mean seen so far by a McDiarmid-bound
// threshold; the signal resets the window and the best mean.
class MddmDetector {
 public:
  explicit MddmDetector(std::size_t n = 100, double delta = 1e-6,
                        MddmScheme scheme = MddmScheme::geometric())
      : n_(n) {
    if (n_ == 0) throw std::invalid_argument("MddmDetector: window size 0");
    weights_.resize(n_);
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      weights_[i] = scheme.weight(i + 1);
      total += weights_[i];
    }
    double sum_v_sq = 0.0;
    for (double& v : weights_) {
      v /= total;
      sum_v_sq += v * v;
    }
    epsilon_ = std::sqrt(0.5 * sum_v_sq * std::log(1.0 / delta));
    reset();
  }

  // Push one correctness bit; returns true when a drift is signaled. On a
  // signal the detector state is cleared.
  bool update(bool correct) {
    window_[head_] = correct ? 1 : 0;
    head_ = (head_ + 1) % n_;
    if (filled_ < n_) {
      ++filled_;
      if (filled_ < n_) return false;
    }
    const double mu = weighted_mean();
    if (mu > mu_max_) {
      mu_max_ = mu;
      return false;
    }
    if (mu_max_ - mu >= epsilon_) {
      reset();
      return true;
    }
    return false;
  }

  void reset() {
    window_.assign(n_, 0);
    head_ = 0;
    filled_ = 0;
    mu_max_ = 0.0;
  }

  double epsilon() const { return epsilon_; }
  bool window_full() const { return filled_ == n_; }

  // Weighted mean of the current window, oldest slot getting the smallest
  // weight. Only meaningful once the window is full.
  double weighted_mean() const {
    double mu = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      mu += weights_[i] * window_[(head_ + i) % n_];
    return mu;
  }

 private:
  std::size_t n_;
  std::vector<double> weights_;  // normalized, oldest..newest
  double epsilon_ = 0.0;
  std::vector<int> window_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  double mu_max_ = 0.0;
};

}  // namespace driftsurf
