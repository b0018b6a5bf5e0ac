#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "driftsurf/data.hpp"
#include "driftsurf/linear_model.hpp"
#include "driftsurf/mddm.hpp"
#include "driftsurf/optimizers.hpp"
#include "driftsurf/rng.hpp"

namespace driftsurf {

enum class InitKind { zero, gaussian };

struct LearnerConfig {
  UpdateProcess process = UpdateProcess::strsaga;
  double eta = 0.01;
  LossConfig loss;
  BudgetPolicy budget;
  std::size_t dim = 0;
  InitKind init = InitKind::zero;
  std::uint64_t seed = 0;
};

// Result of one prequential step: predictions are scored on the incoming
// batch before any model sees its labels.
struct StepOutcome {
  double zero_one_risk = 0.0;
  std::string state;
  std::int64_t model_id = 0;             // model that served the predictions
  std::int64_t model_segment_start = -1; // first step in its training segment
  std::int64_t gradients_spent = 0;
  std::int64_t expected_gradients = 0;   // what the budget policy prescribes
  int models_trained = 0;
};

// Audit record for drift-state changes and predictive-model replacements.
struct TransitionEvent {
  std::int64_t time_step = 0;
  std::string kind;     // "enter_reactive" | "exit_reactive"
  std::string trigger;  // "degradation" | "stable_model" | "switch" | "keep"
  std::string from_state;
  std::string to_state;
  double risk_predictive = 0.0;
  double risk_other = 0.0;
  std::int64_t model_id_before = 0;
  std::int64_t model_id_after = 0;
};

class Learner {
 public:
  virtual ~Learner() = default;
  virtual StepOutcome step(const BatchPtr& batch) = 0;
  virtual const Vector& serving_weights() const = 0;
  virtual int live_models() const = 0;
};

namespace detail {

inline Vector initial_weights(std::size_t dim, InitKind kind, Rng& rng) {
  Vector w(dim, 0.0);
  if (kind == InitKind::gaussian)
    for (auto& v : w) v = rng.gaussian(0.0, 0.01);
  return w;
}

inline double batch_zero_one(const Vector& w, const Batch& batch) {
  return segment_risk(w, batch.points, LossConfig{1.0}, RiskKind::zero_one);
}

}  // namespace detail

// Single model, never reset; trains on the whole stream.
class ObliviousLearner : public Learner {
 public:
  explicit ObliviousLearner(const LearnerConfig& cfg)
      : cfg_(cfg), rng_(derive_seed(cfg.seed, {1})) {
    model_.emplace(cfg.process, cfg.dim, cfg.eta, cfg.loss, next_id_++,
                   detail::initial_weights(cfg.dim, cfg.init, rng_));
  }

  StepOutcome step(const BatchPtr& batch) override {
    StepOutcome out;
    out.zero_one_risk = detail::batch_zero_one(model_->w(), *batch);
    const std::int64_t budget = cfg_.budget.per_model_budget(1);
    model_->update(batch, budget, rng_, &out.gradients_spent);
    out.expected_gradients = budget;
    out.models_trained = 1;
    out.state = "-";
    out.model_id = model_->id();
    out.model_segment_start = model_->segment_start();
    return out;
  }

  const Vector& serving_weights() const override { return model_->w(); }
  int live_models() const override { return 1; }
  const Model& model() const { return *model_; }

 protected:
  LearnerConfig cfg_;
  Rng rng_;
  std::int64_t next_id_ = 1;
  std::optional<Model> model_;
};

// Oracle baseline: resets to a fresh model at the known drift times, before
// predicting on the arriving batch.
class AwareLearner : public Learner {
 public:
  AwareLearner(const LearnerConfig& cfg, std::vector<std::int64_t> drift_times)
      : cfg_(cfg),
        drift_times_(std::move(drift_times)),
        rng_(derive_seed(cfg.seed, {1})) {
    model_.emplace(cfg.process, cfg.dim, cfg.eta, cfg.loss, next_id_++,
                   detail::initial_weights(cfg.dim, cfg.init, rng_));
  }

  StepOutcome step(const BatchPtr& batch) override {
    StepOutcome out;
    const bool reset = std::find(drift_times_.begin(), drift_times_.end(),
                                 batch->time_step) != drift_times_.end();
    if (reset)
      model_.emplace(cfg_.process, cfg_.dim, cfg_.eta, cfg_.loss, next_id_++,
                     detail::initial_weights(cfg_.dim, cfg_.init, rng_));
    out.zero_one_risk = detail::batch_zero_one(model_->w(), *batch);
    const std::int64_t budget = cfg_.budget.per_model_budget(1);
    model_->update(batch, budget, rng_, &out.gradients_spent);
    out.expected_gradients = budget;
    out.models_trained = 1;
    out.state = reset ? "reset" : "-";
    out.model_id = model_->id();
    out.model_segment_start = model_->segment_start();
    return out;
  }

  const Vector& serving_weights() const override { return model_->w(); }
  int live_models() const override { return 1; }
  const Model& model() const { return *model_; }

 private:
  LearnerConfig cfg_;
  std::vector<std::int64_t> drift_times_;
  Rng rng_;
  std::int64_t next_id_ = 1;
  std::optional<Model> model_;
};

// Single model guarded by an MDDM detector over per-point correctness bits.
// A signal discards the model and its sample set; the new model trains from
// the signaling batch onward. The detector tests per point and signals at
// most once per batch.
class MddmLearner : public Learner {
 public:
  MddmLearner(const LearnerConfig& cfg, std::size_t window = 100,
              double delta = 1e-6,
              MddmScheme scheme = MddmScheme::geometric())
      : cfg_(cfg),
        detector_(window, delta, scheme),
        rng_(derive_seed(cfg.seed, {1})) {
    model_.emplace(cfg.process, cfg.dim, cfg.eta, cfg.loss, next_id_++,
                   detail::initial_weights(cfg.dim, cfg.init, rng_));
  }

  StepOutcome step(const BatchPtr& batch) override {
    StepOutcome out;
    std::size_t wrong = 0;
    bool signaled = false;
    for (const LabeledPoint& p : batch->points) {
      const bool correct = predict(model_->w(), p.x) == p.label;
      if (!correct) ++wrong;
      // The detector runs point by point over the whole batch but signals at
      // most once per batch.
      if (detector_.update(correct) && !signaled) signaled = true;
    }
    out.zero_one_risk =
        static_cast<double>(wrong) / static_cast<double>(batch->size());
    if (signaled)
      model_.emplace(cfg_.process, cfg_.dim, cfg_.eta, cfg_.loss, next_id_++,
                     detail::initial_weights(cfg_.dim, cfg_.init, rng_));
    const std::int64_t budget = cfg_.budget.per_model_budget(1);
    model_->update(batch, budget, rng_, &out.gradients_spent);
    out.expected_gradients = budget;
    out.models_trained = 1;
    out.state = signaled ? "drift" : "-";
    out.model_id = model_->id();
    out.model_segment_start = model_->segment_start();
    return out;
  }

  const Vector& serving_weights() const override { return model_->w(); }
  int live_models() const override { return 1; }
  const Model& model() const { return *model_; }
  std::int64_t resets() const { return next_id_ - 2; }

 private:
  LearnerConfig cfg_;
  MddmDetector detector_;
  Rng rng_;
  std::int64_t next_id_ = 1;
  std::optional<Model> model_;
};

// Accuracy-weighted ensemble of k incrementally trained experts. Each step
// re-weights experts by inverse batch error, introduces a fresh expert, drops
// the lowest-weighted expert beyond capacity, and trains every expert.
class AueLearner : public Learner {
 public:
  AueLearner(const LearnerConfig& cfg, int capacity = 10)
      : cfg_(cfg), capacity_(capacity), rng_(derive_seed(cfg.seed, {1})) {
    if (capacity_ < 1) throw std::invalid_argument("AueLearner: capacity < 1");
    experts_.push_back(
        {Model(cfg.process, cfg.dim, cfg.eta, cfg.loss, next_id_++,
               detail::initial_weights(cfg.dim, cfg.init, rng_)),
         1.0});
  }

  StepOutcome step(const BatchPtr& batch) override {
    StepOutcome out;

    std::size_t wrong = 0;
    for (const LabeledPoint& p : batch->points)
      if (vote(p.x) != p.label) ++wrong;
    out.zero_one_risk =
        static_cast<double>(wrong) / static_cast<double>(batch->size());

    // Mean squared error of each expert and of a class-prior baseline.
    const double m = static_cast<double>(batch->size());
    double pos = 0.0;
    for (const LabeledPoint& p : batch->points)
      if (p.label > 0) pos += 1.0;
    const double p_pos = pos / m;
    const double mse_baseline =
        p_pos * (1.0 - p_pos) * (1.0 - p_pos) + (1.0 - p_pos) * p_pos * p_pos;

    for (Expert& e : experts_) {
      double mse = 0.0;
      for (const LabeledPoint& p : batch->points) {
        const double prob_true =
            sigmoid(static_cast<double>(p.label) * dot(e.model.w(), p.x));
        mse += (1.0 - prob_true) * (1.0 - prob_true);
      }
      e.weight = 1.0 / (mse_baseline + mse / m + kEpsilon);
    }

    experts_.push_back(
        {Model(cfg_.process, cfg_.dim, cfg_.eta, cfg_.loss, next_id_++,
               detail::initial_weights(cfg_.dim, cfg_.init, rng_)),
         1.0 / (mse_baseline + kEpsilon)});
    if (static_cast<int>(experts_.size()) > capacity_) {
      auto lowest = std::min_element(
          experts_.begin(), experts_.end(),
          [](const Expert& a, const Expert& b) { return a.weight < b.weight; });
      experts_.erase(lowest);
    }

    const std::int64_t budget =
        cfg_.budget.per_model_budget(static_cast<int>(experts_.size()));
    for (Expert& e : experts_)
      e.model.update(batch, budget, rng_, &out.gradients_spent);
    out.expected_gradients = budget * static_cast<std::int64_t>(experts_.size());
    out.models_trained = static_cast<int>(experts_.size());
    out.state = "-";
    const Expert& best = *std::max_element(
        experts_.begin(), experts_.end(),
        [](const Expert& a, const Expert& b) { return a.weight < b.weight; });
    out.model_id = best.model.id();
    std::int64_t earliest = std::numeric_limits<std::int64_t>::max();
    for (const Expert& e : experts_)
      if (e.model.segment_start() >= 0)
        earliest = std::min(earliest, e.model.segment_start());
    out.model_segment_start =
        earliest == std::numeric_limits<std::int64_t>::max() ? -1 : earliest;
    return out;
  }

  const Vector& serving_weights() const override {
    return experts_.front().model.w();
  }
  int live_models() const override { return static_cast<int>(experts_.size()); }

  int vote(std::span<const double> x) const {
    double score = 0.0;
    for (const Expert& e : experts_)
      score += e.weight * static_cast<double>(predict(e.model.w(), x));
    return score >= 0.0 ? +1 : -1;
  }

  struct Expert {
    Model model;
    double weight;
  };
  const std::vector<Expert>& experts() const { return experts_; }

 private:
  static constexpr double kEpsilon = 1e-9;

  LearnerConfig cfg_;
  int capacity_;
  Rng rng_;
  std::int64_t next_id_ = 1;
  std::vector<Expert> experts_;
};

// Single SGD model taking one in-order pass over each arriving batch:
// exactly m gradient steps per time step, whatever the budget policy allows.
class OnePassSgdLearner : public Learner {
 public:
  explicit OnePassSgdLearner(const LearnerConfig& cfg)
      : cfg_(cfg), rng_(derive_seed(cfg.seed, {1})) {
    model_.emplace(UpdateProcess::sgd, cfg.dim, cfg.eta, cfg.loss, next_id_++,
                   detail::initial_weights(cfg.dim, cfg.init, rng_));
  }

  StepOutcome step(const BatchPtr& batch) override {
    StepOutcome out;
    out.zero_one_risk = detail::batch_zero_one(model_->w(), *batch);
    model_->update_single_pass(batch, &out.gradients_spent);
    out.expected_gradients = static_cast<std::int64_t>(batch->size());
    out.models_trained = 1;
    out.state = "-";
    out.model_id = model_->id();
    out.model_segment_start = model_->segment_start();
    return out;
  }

  const Vector& serving_weights() const override { return model_->w(); }
  int live_models() const override { return 1; }
  const Model& model() const { return *model_; }

 private:
  LearnerConfig cfg_;
  Rng rng_;
  std::int64_t next_id_ = 1;
  std::optional<Model> model_;
};

struct DriftSurfParams {
  int reactive_length = 4;      // r
  double delta = 0.1;           // degradation tolerance for entering
  double delta_prime = 0.05;    // stable-model comparison threshold
  bool greedy = true;           // serve last step's better model while reactive
  RiskKind detection_risk = RiskKind::zero_one;
};

// Stable-state / reactive-state learner. In the stable state it trains the
// predictive model and a corner-case stable model; a risk degradation beyond
// delta (or falling behind the stable model by delta_prime) opens an r-step
// reactive state in which a fresh reactive model competes with the
// predictive model over the window segment T. The window's winner becomes
// predictive; while reactive, the greedy policy serves whichever of the two
// models had the better batch risk in the previous step.
class DriftSurfLearner : public Learner {
 public:
  DriftSurfLearner(const LearnerConfig& cfg, DriftSurfParams params = {})
      : cfg_(cfg), params_(params), rng_(derive_seed(cfg.seed, {1})) {
    predictive_.emplace(fresh_model());
    stable_.emplace(fresh_model());
  }

  StepOutcome step(const BatchPtr& batch) override {
    StepOutcome out;
    const Model& serving =
        (state_ == State::reactive && serve_reactive_) ? *reactive_
                                                       : *predictive_;
    out.zero_one_risk = detail::batch_zero_one(serving.w(), *batch);
    out.model_id = serving.id();
    out.model_segment_start = serving.segment_start();

    const double pred_risk = detection_risk(predictive_->w(), batch->points);
    const std::int64_t budget = cfg_.budget.per_model_budget(2);

    if (state_ == State::stable) {
      const bool degraded = pred_risk > best_risk_ + params_.delta;
      bool behind_stable = false;
      double stable_risk = 0.0;
      if (stable_->segment_points() > 0) {
        stable_risk = detection_risk(stable_->w(), batch->points);
        behind_stable = pred_risk > stable_risk + params_.delta_prime;
      }
      if (degraded || behind_stable) {
        transitions_.push_back({batch->time_step, "enter_reactive",
                                degraded ? "degradation" : "stable_model",
                                "stable", "reactive", pred_risk,
                                degraded ? best_risk_ : stable_risk,
                                predictive_->id(), predictive_->id()});
        state_ = State::reactive;
        window_.clear();
        reactive_.emplace(fresh_model());
        reactive_steps_ = 0;
        serve_reactive_ = false;
        // falls through to the reactive branch for this same batch
      } else {
        predictive_->update(batch, budget, rng_, &out.gradients_spent);
        stable_->update(batch, budget, rng_, &out.gradients_spent);
      }
    }
    best_risk_ = std::min(best_risk_, pred_risk);

    if (state_ == State::reactive) {
      window_.push_back(batch);
      predictive_->update(batch, budget, rng_, &out.gradients_spent);
      reactive_->update(batch, budget, rng_, &out.gradients_spent);
      ++reactive_steps_;
      if (reactive_steps_ == params_.reactive_length) {
        exit_reactive(batch->time_step);
      } else if (params_.greedy) {
        serve_reactive_ = detection_risk(reactive_->w(), batch->points) <
                          detection_risk(predictive_->w(), batch->points);
      }
    }

    out.expected_gradients = 2 * budget;
    out.models_trained = 2;
    out.state = state_ == State::stable ? "stable" : "reactive";
    return out;
  }

  const Vector& serving_weights() const override {
    return (state_ == State::reactive && serve_reactive_) ? reactive_->w()
                                                          : predictive_->w();
  }
  int live_models() const override { return 2; }

  const Model& predictive_model() const { return *predictive_; }
  const Model& stable_model() const { return *stable_; }
  bool in_reactive_state() const { return state_ == State::reactive; }
  double best_observed_risk() const { return best_risk_; }
  const std::vector<TransitionEvent>& transitions() const {
    return transitions_;
  }
  std::int64_t predictive_switches() const { return switches_; }

 private:
  enum class State { stable, reactive };

  Model fresh_model() {
    return Model(cfg_.process, cfg_.dim, cfg_.eta, cfg_.loss, next_id_++,
                 detail::initial_weights(cfg_.dim, cfg_.init, rng_));
  }

  template <class Range>
  double detection_risk(const Vector& w, const Range& pts) const {
    return segment_risk(w, pts, cfg_.loss, params_.detection_risk);
  }

  void exit_reactive(std::int64_t time_step) {
    double pred_window_risk = 0.0, reactive_window_risk = 0.0;
    std::size_t count = 0;
    for (const BatchPtr& b : window_) count += b->size();
    std::vector<const LabeledPoint*> window_points;
    window_points.reserve(count);
    for (const BatchPtr& b : window_)
      for (const LabeledPoint& p : b->points) window_points.push_back(&p);
    pred_window_risk = detection_risk(predictive_->w(), window_points);
    reactive_window_risk = detection_risk(reactive_->w(), window_points);

    const bool switch_model = reactive_window_risk < pred_window_risk;
    transitions_.push_back({time_step, "exit_reactive",
                            switch_model ? "switch" : "keep", "reactive",
                            "stable", pred_window_risk, reactive_window_risk,
                            predictive_->id(),
                            switch_model ? reactive_->id()
                                         : predictive_->id()});
    if (switch_model) {
      predictive_.emplace(std::move(*reactive_));
      best_risk_ = std::numeric_limits<double>::infinity();
      ++switches_;
    }
    reactive_.reset();
    stable_.emplace(fresh_model());
    state_ = State::stable;
    serve_reactive_ = false;
    window_.clear();
  }

  LearnerConfig cfg_;
  DriftSurfParams params_;
  Rng rng_;
  std::int64_t next_id_ = 1;

  State state_ = State::stable;
  std::optional<Model> predictive_;
  std::optional<Model> stable_;
  std::optional<Model> reactive_;
  double best_risk_ = std::numeric_limits<double>::infinity();
  std::vector<BatchPtr> window_;  // T: batches of the current reactive state
  int reactive_steps_ = 0;        // i
  bool serve_reactive_ = false;
  std::vector<TransitionEvent> transitions_;
  std::int64_t switches_ = 0;
};

}  // namespace driftsurf
