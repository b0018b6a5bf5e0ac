#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "driftsurf/data.hpp"

namespace driftsurf {

using Vector = std::vector<double>;

// L2 regularization strength; mu > 0 makes the empirical risk strongly convex.
struct LossConfig {
  double mu = 1e-3;
};

enum class RiskKind { logistic, zero_one };

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow for large |z|.
inline double log1p_exp(double z) {
  if (z <= 0.0) return std::log1p(std::exp(z));
  return z + std::log1p(std::exp(-z));
}

// Sign of the linear score; ties go to +1.
inline int predict(const Vector& w, std::span<const double> x) {
  return dot(w, x) >= 0.0 ? +1 : -1;
}

// log(1 + exp(-y w.x)) + mu/2 |w|^2
inline double point_loss(const Vector& w, const LabeledPoint& p,
                         const LossConfig& cfg) {
  const double z = -static_cast<double>(p.label) * dot(w, p.x);
  return log1p_exp(z) + 0.5 * cfg.mu * norm_sq(w);
}

// grad = -y x sigma(-y w.x) + mu w, written into out.
inline void point_gradient(const Vector& w, const LabeledPoint& p,
                           const LossConfig& cfg, Vector& out) {
  if (w.size() != p.x.size())
    throw std::invalid_argument("point_gradient: dimension mismatch");
  const double z = -static_cast<double>(p.label) * dot(w, p.x);
  const double scale = -static_cast<double>(p.label) * sigmoid(z);
  out.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    out[i] = scale * p.x[i] + cfg.mu * w[i];
}

inline Vector point_gradient(const Vector& w, const LabeledPoint& p,
                             const LossConfig& cfg) {
  Vector g;
  point_gradient(w, p, cfg, g);
  return g;
}

namespace detail {
inline const LabeledPoint& deref(const LabeledPoint& p) { return p; }
inline const LabeledPoint& deref(const LabeledPoint* p) { return *p; }
}  // namespace detail

// Mean loss (logistic) or misclassification fraction (zero_one) over a
// nonempty collection of points.
template <class Range>
double segment_risk(const Vector& w, const Range& pts, const LossConfig& cfg,
                    RiskKind kind) {
  std::size_t n = 0;
  double sum = 0.0;
  for (const auto& item : pts) {
    const LabeledPoint& p = detail::deref(item);
    if (kind == RiskKind::logistic) {
      sum += point_loss(w, p, cfg);
    } else {
      sum += (predict(w, p.x) != p.label) ? 1.0 : 0.0;
    }
    ++n;
  }
  if (n == 0) throw std::invalid_argument("segment_risk: empty collection");
  return sum / static_cast<double>(n);
}

}  // namespace driftsurf
