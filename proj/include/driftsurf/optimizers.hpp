#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "driftsurf/data.hpp"
#include "driftsurf/linear_model.hpp"
#include "driftsurf/rng.hpp"

namespace driftsurf {

enum class UpdateProcess { strsaga, sgd };
enum class BudgetMode { per_model, per_algorithm };

// rho gradient computations per time step, spent either per model or split
// equally across an algorithm's live models (flooring; the remainder is
// discarded).
struct BudgetPolicy {
  std::int64_t rho = 0;
  BudgetMode mode = BudgetMode::per_model;

  std::int64_t per_model_budget(int live_models) const {
    if (live_models <= 0) return 0;
    return mode == BudgetMode::per_model ? rho : rho / live_models;
  }
};

// One incrementally trained base model: weights plus the stream segment it
// owns. STRSAGA admits arrivals from a FIFO waiting room into its sample set
// on every other iteration and takes variance-reduced steps using the stored
// per-point gradients; SGD admits the whole batch immediately and takes plain
// stochastic steps.
class Model {
 public:
  Model(UpdateProcess process, std::size_t dim, double eta, LossConfig loss,
        std::int64_t id, Vector init_w = {})
      : process_(process), eta_(eta), loss_(loss), id_(id) {
    w_ = init_w.empty() ? Vector(dim, 0.0) : std::move(init_w);
    if (w_.size() != dim)
      throw std::invalid_argument("Model: init weight dimension mismatch");
    if (process_ == UpdateProcess::strsaga) alpha_sum_.assign(dim, 0.0);
  }

  // Absorb the batch, then spend `budget` gradient computations. Every
  // computed gradient increments *grad_counter.
  void update(const BatchPtr& batch, std::int64_t budget, Rng& rng,
              std::int64_t* grad_counter = nullptr) {
    if (batch) segment_.append_batch(batch);
    if (process_ == UpdateProcess::sgd) {
      sgd_steps(budget, rng, grad_counter);
    } else {
      strsaga_steps(budget, rng, grad_counter);
    }
  }

  // One pass over the batch in arrival order, one gradient step per point.
  // Spends exactly batch->size() gradients regardless of any budget.
  void update_single_pass(const BatchPtr& batch,
                          std::int64_t* grad_counter = nullptr) {
    if (!batch) return;
    segment_.append_batch(batch);
    Vector g;
    for (const LabeledPoint& p : batch->points) {
      point_gradient(w_, p, loss_, g);
      if (grad_counter) ++*grad_counter;
      for (std::size_t i = 0; i < w_.size(); ++i) w_[i] -= eta_ * g[i];
    }
    admitted_ = segment_.size();
  }

  const Vector& w() const { return w_; }
  std::int64_t id() const { return id_; }
  double eta() const { return eta_; }
  UpdateProcess process() const { return process_; }

  // First stream step in this model's segment; -1 before any data.
  std::int64_t segment_start() const { return segment_.start_step(); }
  std::size_t segment_points() const { return segment_.size(); }
  const SampleSet& segment() const { return segment_; }

  // |S|: the points the model actually samples from. For STRSAGA this is the
  // admitted prefix of the segment; arrivals not yet admitted sit in the
  // waiting room suffix.
  std::size_t sample_size() const {
    return process_ == UpdateProcess::sgd ? segment_.size() : admitted_;
  }
  std::size_t waiting_size() const { return segment_.size() - sample_size(); }

  std::span<const LabeledPoint* const> sample_points() const {
    return segment_.points().subspan(0, sample_size());
  }

  const Vector& stored_gradient(std::size_t i) const { return alpha_[i]; }
  Vector average_stored_gradient() const {
    Vector a(w_.size(), 0.0);
    if (admitted_ == 0) return a;
    for (std::size_t i = 0; i < w_.size(); ++i)
      a[i] = alpha_sum_[i] / static_cast<double>(admitted_);
    return a;
  }

 private:
  void sgd_steps(std::int64_t budget, Rng& rng, std::int64_t* grad_counter) {
    if (segment_.empty()) return;
    Vector g;
    for (std::int64_t j = 0; j < budget; ++j) {
      const LabeledPoint& p = segment_.uniform_sample(rng);
      point_gradient(w_, p, loss_, g);
      if (grad_counter) ++*grad_counter;
      for (std::size_t i = 0; i < w_.size(); ++i) w_[i] -= eta_ * g[i];
    }
  }

  void strsaga_steps(std::int64_t budget, Rng& rng,
                     std::int64_t* grad_counter) {
    Vector g;
    for (std::int64_t j = 1; j <= budget; ++j) {
      const bool waiting = admitted_ < segment_.size();
      std::size_t idx;
      if (waiting && (j % 2 == 0 || admitted_ == 0)) {
        // Admit the oldest waiting point with a zero stored gradient. The
        // odd-iteration case covers a model whose sample set is still empty,
        // where a uniform sample is impossible.
        idx = admitted_;
        alpha_.emplace_back(w_.size(), 0.0);
        ++admitted_;
      } else if (admitted_ > 0) {
        idx = rng.index(admitted_);
      } else {
        continue;  // no data anywhere: nothing to compute
      }
      const LabeledPoint& p = segment_[idx];
      point_gradient(w_, p, loss_, g);
      if (grad_counter) ++*grad_counter;
      const double inv_n = 1.0 / static_cast<double>(admitted_);
      Vector& alpha_p = alpha_[idx];
      for (std::size_t i = 0; i < w_.size(); ++i) {
        const double avg = alpha_sum_[i] * inv_n;
        w_[i] -= eta_ * (g[i] - alpha_p[i] + avg);
        alpha_sum_[i] += g[i] - alpha_p[i];
        alpha_p[i] = g[i];
      }
    }
  }

  UpdateProcess process_;
  double eta_;
  LossConfig loss_;
  std::int64_t id_;
  Vector w_;
  SampleSet segment_;
  std::size_t admitted_ = 0;       // STRSAGA: |S|; SGD ignores it
  std::vector<Vector> alpha_;      // stored gradient per admitted point
  Vector alpha_sum_;               // running sum of alpha_
};

// Full-batch minimizer of the regularized empirical risk, used as an
// independent reference. Gradient descent with a Barzilai-Borwein trial step
// and Armijo backtracking (constant 1e-4, halving), run from w = 0 until the
// gradient norm drops to tol.
inline Vector erm_optimize(std::span<const LabeledPoint* const> pts,
                           const LossConfig& cfg, double tol,
                           std::int64_t max_iters = 1000000) {
  if (pts.empty()) throw std::invalid_argument("erm_optimize: empty segment");
  if (tol <= 0.0) throw std::invalid_argument("erm_optimize: tol must be > 0");
  const std::size_t dim = pts.front()->x.size();
  const long double inv_n = 1.0L / static_cast<long double>(pts.size());

  // Extended-precision accumulation keeps the line search meaningful down to
  // gradient norms well below the requested tolerances.
  auto risk = [&](const Vector& w) {
    long double s = 0.0L;
    for (const LabeledPoint* p : pts)
      s += log1p_exp(-static_cast<double>(p->label) * dot(w, p->x));
    return static_cast<double>(s * inv_n + 0.5L * cfg.mu * norm_sq(w));
  };
  std::vector<long double> acc(dim);
  auto grad = [&](const Vector& w, Vector& g) {
    std::fill(acc.begin(), acc.end(), 0.0L);
    for (const LabeledPoint* p : pts) {
      const double y = static_cast<double>(p->label);
      const double s = -y * sigmoid(-y * dot(w, p->x));
      for (std::size_t i = 0; i < dim; ++i) acc[i] += s * p->x[i];
    }
    g.resize(dim);
    for (std::size_t i = 0; i < dim; ++i)
      g[i] = static_cast<double>(acc[i] * inv_n + cfg.mu * w[i]);
  };

  Vector w(dim, 0.0), g, w_prev, g_prev, trial(dim);
  grad(w, g);
  double f = risk(w);
  double step = 1.0;

  for (std::int64_t iter = 0; iter < max_iters; ++iter) {
    const double gnorm_sq = norm_sq(g);
    if (std::sqrt(gnorm_sq) <= tol) return w;

    double t = step;
    if (!w_prev.empty()) {
      double ss = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double si = w[i] - w_prev[i];
        const double yi = g[i] - g_prev[i];
        ss += si * si;
        sy += si * yi;
      }
      if (sy > 1e-300 && std::isfinite(ss / sy)) t = ss / sy;
    }
    if (!(t > 0.0) || !std::isfinite(t)) t = 1.0;

    double f_new = 0.0;
    bool decreased = false;
    for (int halvings = 0; halvings < 80; ++halvings) {
      for (std::size_t i = 0; i < dim; ++i) trial[i] = w[i] - t * g[i];
      f_new = risk(trial);
      if (f_new <= f - 1e-4 * t * gnorm_sq) {
        decreased = true;
        break;
      }
      t *= 0.5;
    }
    if (!decreased && f_new >= f)
      throw std::runtime_error(
          "erm_optimize: line search stalled at floating-point precision; "
          "gradient norm " +
          std::to_string(std::sqrt(gnorm_sq)));
    w_prev = w;
    g_prev = g;
    w = trial;
    f = f_new;
    step = t;
    grad(w, g);
  }
  throw std::runtime_error(
      "erm_optimize: iteration cap exceeded; gradient norm " +
      std::to_string(norm(g)));
}

inline Vector erm_optimize(std::span<const LabeledPoint> pts,
                           const LossConfig& cfg, double tol,
                           std::int64_t max_iters = 1000000) {
  std::vector<const LabeledPoint*> ptrs;
  ptrs.reserve(pts.size());
  for (const LabeledPoint& p : pts) ptrs.push_back(&p);
  return erm_optimize(std::span<const LabeledPoint* const>(ptrs), cfg, tol,
                      max_iters);
}

}  // namespace driftsurf
