#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <set>
#include <vector>

#include "driftsurf/data.hpp"
#include "driftsurf/rng.hpp"

using namespace driftsurf;

namespace {

BatchPtr make_batch(std::int64_t step, std::int64_t m, std::int64_t first_id) {
  auto b = std::make_shared<Batch>();
  b->time_step = step;
  for (std::int64_t j = 0; j < m; ++j) {
    LabeledPoint p;
    p.x = {static_cast<double>(first_id + j)};
    p.label = (j % 2 == 0) ? +1 : -1;
    p.id = first_id + j;
    b->points.push_back(std::move(p));
  }
  return b;
}

}  // namespace

TEST_CASE("append_batch grows the set by the batch size", "[data_model]") {
  SampleSet set;
  set.append_batch(make_batch(0, 3, 0));
  CHECK(set.size() == 3);

  SampleSet bigger;
  bigger.append_batch(make_batch(0, 5, 0));
  bigger.append_batch(make_batch(1, 5, 5));
  CHECK(bigger.size() == 10);
  bigger.append_batch(make_batch(2, 5, 10));
  CHECK(bigger.size() == 15);
}

TEST_CASE("append_batch rejects a non-contiguous batch", "[data_model]") {
  SampleSet set;
  set.append_batch(make_batch(0, 5, 0));
  set.append_batch(make_batch(1, 5, 5));
  CHECK_THROWS_AS(set.append_batch(make_batch(3, 5, 10)),
                  std::invalid_argument);
  CHECK_THROWS_AS(set.append_batch(make_batch(1, 5, 10)),
                  std::invalid_argument);
}

TEST_CASE("uniform_sample returns the only element of a singleton",
          "[data_model]") {
  SampleSet set;
  set.append_batch(make_batch(0, 1, 42));
  Rng rng(7);
  for (int i = 0; i < 10; ++i) CHECK(set.uniform_sample(rng).id == 42);
}

TEST_CASE("uniform_sample rejects an empty set", "[data_model]") {
  SampleSet set;
  Rng rng(1);
  CHECK_THROWS_AS(set.uniform_sample(rng), std::logic_error);
}

TEST_CASE("uniform_sample is reproducible for a fixed seed", "[data_model]") {
  SampleSet set;
  set.append_batch(make_batch(0, 4, 0));
  std::vector<std::int64_t> first, second;
  {
    Rng rng(123);
    for (int i = 0; i < 50; ++i) first.push_back(set.uniform_sample(rng).id);
  }
  {
    Rng rng(123);
    for (int i = 0; i < 50; ++i) second.push_back(set.uniform_sample(rng).id);
  }
  CHECK(first == second);
}

TEST_CASE("uniform_sample frequencies stay within 5 sigma of uniform",
          "[data_model]") {
  constexpr std::int64_t n = 10000;
  constexpr std::int64_t draws = 1000000;
  SampleSet set;
  std::int64_t id = 0;
  for (std::int64_t t = 0; t < 10; ++t) {
    set.append_batch(make_batch(t, n / 10, id));
    id += n / 10;
  }
  REQUIRE(set.size() == static_cast<std::size_t>(n));

  std::vector<std::int64_t> counts(n, 0);
  Rng rng(99);
  for (std::int64_t i = 0; i < draws; ++i)
    ++counts[set.uniform_sample(rng).id];

  const double expected = static_cast<double>(draws) / n;  // 100
  const double sigma = std::sqrt(expected * (1.0 - 1.0 / n));
  std::int64_t worst = 0;
  for (std::int64_t c : counts)
    worst = std::max(worst, std::abs(c - static_cast<std::int64_t>(expected)));
  CHECK(static_cast<double>(worst) <= 5.0 * sigma);
}

TEST_CASE("shared batches alias the same point storage", "[data_model]") {
  auto b0 = make_batch(5, 4, 0);
  auto b1 = make_batch(6, 4, 4);
  SampleSet parent;
  parent.append_batch(b0);
  parent.append_batch(b1);

  // A view created mid-stream shares the parent's underlying points.
  SampleSet view;
  view.append_batch(b1);
  for (std::size_t i = 0; i < view.size(); ++i)
    CHECK(&view[i] == &parent[parent.size() - view.size() + i]);
  CHECK(view.start_step() == 6);
  CHECK(parent.start_step() == 5);
}

TEST_CASE("a stream is partitioned into batches exactly once", "[data_model]") {
  std::vector<BatchPtr> stream;
  std::int64_t id = 0;
  for (std::int64_t t = 0; t < 20; ++t) {
    stream.push_back(make_batch(t, 7, id));
    id += 7;
  }
  std::set<std::int64_t> seen;
  for (const BatchPtr& b : stream) {
    CHECK(b->size() == 7);
    for (const LabeledPoint& p : b->points) CHECK(seen.insert(p.id).second);
  }
  CHECK(seen.size() == 140);
  CHECK(*seen.rbegin() == 139);
}
