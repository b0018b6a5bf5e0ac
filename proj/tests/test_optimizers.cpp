#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>
#include <vector>

#include "driftsurf/optimizers.hpp"
#include "driftsurf/probes.hpp"
#include "driftsurf/rng.hpp"

using namespace driftsurf;

namespace {

BatchPtr batch_of(std::int64_t step,
                  std::vector<std::pair<std::vector<double>, int>> rows,
                  std::int64_t first_id = 0) {
  auto b = std::make_shared<Batch>();
  b->time_step = step;
  for (auto& [x, y] : rows) {
    LabeledPoint p;
    p.x = std::move(x);
    p.label = y;
    p.id = first_id++;
    b->points.push_back(std::move(p));
  }
  return b;
}

BatchPtr random_batch(std::int64_t step, std::int64_t m, Rng& rng,
                      std::int64_t first_id) {
  std::vector<std::pair<std::vector<double>, int>> rows;
  for (std::int64_t j = 0; j < m; ++j) {
    std::vector<double> x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 1.0};
    const int y = (x[0] + 0.5 * x[1] + 0.1 * rng.gaussian() >= 0.0) ? +1 : -1;
    rows.push_back({std::move(x), y});
  }
  return batch_of(step, std::move(rows), first_id);
}

double subopt(const Model& model, const LossConfig& cfg) {
  const Vector opt = erm_optimize(model.sample_points(), cfg, 1e-10);
  return segment_risk(model.w(), model.sample_points(), cfg,
                      RiskKind::logistic) -
         segment_risk(opt, model.sample_points(), cfg, RiskKind::logistic);
}

}  // namespace

TEST_CASE("sgd with zero budget only absorbs the batch", "[optimizers]") {
  Model model(UpdateProcess::sgd, 2, 0.1, LossConfig{0.01}, 1);
  Rng rng(1);
  std::int64_t grads = 0;
  model.update(batch_of(0, {{{1.0, 2.0}, +1}, {{0.5, 0.1}, -1}}), 0, rng,
               &grads);
  CHECK(model.sample_size() == 2);
  CHECK(grads == 0);
  CHECK(model.w() == Vector{0.0, 0.0});
}

TEST_CASE("one sgd step from zero moves along eta y x / 2", "[optimizers]") {
  const double eta = 0.3;
  Model model(UpdateProcess::sgd, 2, eta, LossConfig{0.7}, 1);
  Rng rng(5);
  std::int64_t grads = 0;
  model.update(batch_of(0, {{{2.0, -1.0}, -1}}), 1, rng, &grads);
  CHECK(grads == 1);
  // gradient at w=0 is -y x/2; with y=-1, x=(2,-1) the step is -eta (1, -0.5)
  CHECK_THAT(model.w()[0], Catch::Matchers::WithinAbs(-eta * 1.0, 1e-12));
  CHECK_THAT(model.w()[1], Catch::Matchers::WithinAbs(eta * 0.5, 1e-12));
}

TEST_CASE("sgd converges near the reference optimum on a toy set",
          "[optimizers]") {
  const LossConfig cfg{0.5};
  Model model(UpdateProcess::sgd, 1, 5e-4, cfg, 1);
  Rng rng(77);
  model.update(batch_of(0, {{{1.0}, +1}, {{3.0}, -1}}), 100000, rng);
  const Vector opt = erm_optimize(model.sample_points(), cfg, 1e-10);
  CHECK(std::abs(model.w()[0] - opt[0]) < 0.05);
}

TEST_CASE("strsaga admits both points of a fresh two-point batch",
          "[optimizers]") {
  Model model(UpdateProcess::strsaga, 2, 0.1, LossConfig{0.01}, 1);
  Rng rng(3);
  std::int64_t grads = 0;
  model.update(batch_of(0, {{{1.0, 0.0}, +1}, {{0.0, 1.0}, -1}}), 4, rng,
               &grads);
  // Iteration 1 hits the empty-sample-set rule and admits; iteration 2 admits
  // the second point; 3 and 4 are uniform steps.
  CHECK(model.sample_size() == 2);
  CHECK(model.waiting_size() == 0);
  CHECK(grads == 4);
}

TEST_CASE("strsaga admission is capped by the alternating schedule",
          "[optimizers]") {
  Model model(UpdateProcess::strsaga, 1, 0.1, LossConfig{0.01}, 1);
  Rng rng(3);
  std::vector<std::pair<std::vector<double>, int>> rows;
  for (int j = 0; j < 10; ++j) rows.push_back({{1.0}, +1});
  model.update(batch_of(0, std::move(rows)), 4, rng);
  // Admissions at iterations 1 (bootstrap), 2, and 4.
  CHECK(model.sample_size() == 3);
  CHECK(model.waiting_size() == 7);

  // A later step with a full sample set admits only on even iterations.
  rows.clear();
  for (int j = 0; j < 10; ++j) rows.push_back({{1.0}, -1});
  model.update(batch_of(1, std::move(rows), 10), 4, rng);
  CHECK(model.sample_size() == 5);
  CHECK(model.waiting_size() == 15);
}

TEST_CASE("strsaga drains the waiting room in steady state", "[optimizers]") {
  const std::int64_t m = 20;
  Model model(UpdateProcess::strsaga, 3, 0.01, LossConfig{0.01}, 1);
  Rng rng(8);
  Rng data_rng(9);
  std::int64_t id = 0;
  for (std::int64_t t = 0; t < 12; ++t) {
    model.update(random_batch(t, m, data_rng, id), 2 * m, rng);
    id += m;
    CHECK(model.waiting_size() == 0);
    CHECK(model.sample_size() == static_cast<std::size_t>((t + 1) * m));
  }
}

TEST_CASE("strsaga admits in arrival order", "[optimizers]") {
  Model model(UpdateProcess::strsaga, 3, 0.01, LossConfig{0.01}, 1);
  Rng rng(8);
  Rng data_rng(10);
  std::int64_t id = 0;
  for (std::int64_t t = 0; t < 5; ++t) {
    model.update(random_batch(t, 9, data_rng, id), 7, rng);
    id += 9;
    auto admitted = model.sample_points();
    for (std::size_t i = 0; i < admitted.size(); ++i)
      CHECK(admitted[i]->id == static_cast<std::int64_t>(i));
  }
}

TEST_CASE("strsaga keeps the stored-gradient mean consistent",
          "[optimizers]") {
  Model model(UpdateProcess::strsaga, 3, 0.05, LossConfig{0.01}, 1);
  Rng rng(21);
  Rng data_rng(22);
  std::int64_t id = 0;
  for (std::int64_t t = 0; t < 8; ++t) {
    model.update(random_batch(t, 25, data_rng, id), 50, rng);
    id += 25;
    const Vector avg = model.average_stored_gradient();
    Vector manual(3, 0.0);
    for (std::size_t i = 0; i < model.sample_size(); ++i) {
      const Vector& a = model.stored_gradient(i);
      for (std::size_t d = 0; d < 3; ++d) manual[d] += a[d];
    }
    for (std::size_t d = 0; d < 3; ++d) {
      manual[d] /= static_cast<double>(model.sample_size());
      CHECK(std::abs(manual[d] - avg[d]) <= 1e-9);
    }
  }
}

TEST_CASE("every update spends exactly the requested budget", "[optimizers]") {
  Rng data_rng(31);
  for (UpdateProcess proc : {UpdateProcess::sgd, UpdateProcess::strsaga}) {
    Model model(proc, 3, 0.01, LossConfig{0.01}, 1);
    Rng rng(30);
    std::int64_t id = 0;
    for (std::int64_t t = 0; t < 6; ++t) {
      std::int64_t grads = 0;
      const std::int64_t budget = 10 + 7 * t;
      model.update(random_batch(t, 12, data_rng, id), budget, rng, &grads);
      id += 12;
      CHECK(grads == budget);
    }
  }
}

TEST_CASE("variance reduction beats plain sgd at equal step size",
          "[optimizers]") {
  const LossConfig cfg{0.01};
  const double eta = 0.05;
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng data_rng(100 + seed);
    const BatchPtr data = random_batch(0, 100, data_rng, 0);

    Model saga(UpdateProcess::strsaga, 3, eta, cfg, 1);
    Model sgd(UpdateProcess::sgd, 3, eta, cfg, 2);
    Rng rng_a(200 + seed), rng_b(300 + seed);
    saga.update(data, 5000, rng_a);
    sgd.update(data, 5000, rng_b);
    if (subopt(saga, cfg) < subopt(sgd, cfg)) ++wins;
  }
  CHECK(wins >= 3);  // median over the five seeds
}

TEST_CASE("suboptimality shrinks as the stream grows", "[optimizers]") {
  // Medians over five seeded streams at growing checkpoints; the gap to the
  // reference optimum must not grow while data and iterations accumulate.
  const auto reports = probe_suboptimality(808, 5);
  REQUIRE(reports.size() == 3);
  for (const ProbeReport& r : reports) {
    CHECK(r.per_seed.size() == 5);
    CHECK(r.pass);
  }
  CHECK(reports[2].median_value < reports[0].median_value);
}

TEST_CASE("erm_optimize solves the scalar optimality equation",
          "[optimizers]") {
  // For a single point x=1, y=+1, mu=1 the optimum satisfies w = sigma(-w).
  // Bisection on that equation gives the reference root.
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid - sigmoid(-mid) < 0.0) lo = mid;
    else hi = mid;
  }
  const double root = 0.5 * (lo + hi);
  CHECK_THAT(root, Catch::Matchers::WithinAbs(0.401058, 1e-6));

  std::vector<LabeledPoint> pts(1);
  pts[0].x = {1.0};
  pts[0].label = +1;
  const Vector w = erm_optimize(std::span<const LabeledPoint>(pts),
                                LossConfig{1.0}, 1e-10);
  CHECK_THAT(w[0], Catch::Matchers::WithinAbs(root, 1e-8));
}

TEST_CASE("erm_optimize returns zero for a symmetric pair", "[optimizers]") {
  std::vector<LabeledPoint> pts(2);
  pts[0].x = {1.5, -0.5};
  pts[0].label = +1;
  pts[1].x = {1.5, -0.5};
  pts[1].label = -1;
  const Vector w = erm_optimize(std::span<const LabeledPoint>(pts),
                                LossConfig{0.3}, 1e-10);
  CHECK_THAT(norm(w), Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("erm_optimize meets its gradient tolerance", "[optimizers]") {
  Rng rng(600);
  const BatchPtr data = random_batch(0, 60, rng, 0);
  const LossConfig cfg{0.02};
  const double tol = 1e-8;
  const Vector w = erm_optimize(
      std::span<const LabeledPoint>(data->points), cfg, tol);

  Vector g(3, 0.0);
  for (const LabeledPoint& p : data->points) {
    const Vector gp = point_gradient(w, p, cfg);
    for (int d = 0; d < 3; ++d) g[d] += gp[d];
  }
  for (int d = 0; d < 3; ++d) g[d] /= 60.0;
  CHECK(norm(g) <= tol);
}

TEST_CASE("erm_optimize reports the gradient norm when capped",
          "[optimizers]") {
  std::vector<LabeledPoint> pts(1);
  pts[0].x = {1.0};
  pts[0].label = +1;
  CHECK_THROWS_WITH(
      erm_optimize(std::span<const LabeledPoint>(pts), LossConfig{1.0}, 1e-12,
                   1),
      Catch::Matchers::ContainsSubstring("gradient norm"));
}

TEST_CASE("budget policy splits evenly per algorithm", "[optimizers]") {
  BudgetPolicy per_model{4000, BudgetMode::per_model};
  CHECK(per_model.per_model_budget(10) == 4000);
  BudgetPolicy per_alg{4000, BudgetMode::per_algorithm};
  CHECK(per_alg.per_model_budget(10) == 400);
  CHECK(per_alg.per_model_budget(3) == 1333);  // floored, remainder discarded
  CHECK(per_alg.per_model_budget(2) == 2000);
}
