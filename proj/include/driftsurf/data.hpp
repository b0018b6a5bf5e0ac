#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftsurf/rng.hpp"

namespace driftsurf {

// One arrival: dense features, a +/-1 label, and a global arrival index.
struct LabeledPoint {
  std::vector<double> x;
  int label = 1;  // -1 or +1
  std::int64_t id = 0;
};

// The set of points arriving at one time step.
struct Batch {
  std::int64_t time_step = 0;
  std::vector<LabeledPoint> points;

  std::size_t size() const { return points.size(); }
};

using BatchPtr = std::shared_ptr<const Batch>;

// A contiguous stream segment [start_step, next_step) owned by one model.
// Batches are shared, so two sets built from the same stream alias the same
// underlying point storage.
class SampleSet {
 public:
  void append_batch(BatchPtr batch) {
    if (!batch) throw std::invalid_argument("SampleSet::append_batch: null batch");
    if (!batches_.empty() && batch->time_step != next_step()) {
      throw std::invalid_argument(
          "SampleSet::append_batch: non-contiguous batch (expected step " +
          std::to_string(next_step()) + ", got " +
          std::to_string(batch->time_step) + ")");
    }
    for (const LabeledPoint& p : batch->points) points_.push_back(&p);
    batches_.push_back(std::move(batch));
  }

  const LabeledPoint& uniform_sample(Rng& rng) const {
    if (points_.empty())
      throw std::logic_error("SampleSet::uniform_sample: empty set");
    return *points_[rng.index(points_.size())];
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  // -1 when no batch has been appended yet.
  std::int64_t start_step() const {
    return batches_.empty() ? -1 : batches_.front()->time_step;
  }
  std::int64_t next_step() const {
    return batches_.empty() ? -1 : batches_.back()->time_step + 1;
  }

  const LabeledPoint& operator[](std::size_t i) const { return *points_[i]; }

  std::span<const LabeledPoint* const> points() const { return points_; }

  void clear() {
    batches_.clear();
    points_.clear();
  }

 private:
  std::vector<BatchPtr> batches_;
  std::vector<const LabeledPoint*> points_;
};

}  // namespace driftsurf
