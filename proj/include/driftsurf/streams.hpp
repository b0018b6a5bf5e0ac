#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "driftsurf/csv.hpp"
#include "driftsurf/data.hpp"
#include "driftsurf/rng.hpp"

namespace driftsurf {

enum class Family { sea, hyperplane, sine1, mixed, circles, csv_file };

struct DriftSchedule {
  enum class Kind { none, abrupt, gradual };
  Kind kind = Kind::none;
  std::vector<std::int64_t> change_points;                       // abrupt
  std::vector<std::pair<std::int64_t, std::int64_t>> windows;    // gradual
};

struct GeneratorSpec {
  Family family = Family::sea;
  std::int64_t total_steps = 100;
  std::int64_t batch_size = 1000;
  double noise_rate = 0.0;  // per-label flip probability at generation
  std::uint64_t seed = 0;
  bool add_intercept = true;      // append a constant feature
  double intercept_value = 1.0;   // emitted at the family's attribute scale
  bool stationary = false;        // freeze the first concept for the whole stream

  // SEA: thresholds 9, 8, 7, 9.5 applied in concept order 3,2,4,1 over four
  // equal segments; the gradual variant mixes the first two concepts of that
  // order across a window.
  bool sea_gradual = false;
  std::pair<std::int64_t, std::int64_t> sea_gradual_window{40, 60};

  // Hyperplane: every coefficient moves by `magnitude` per generated point,
  // reversing direction with probability `reversal_prob` per coordinate.
  double hyper_magnitude = 0.001;
  double hyper_reversal_prob = 0.1;

  // SINE1 / Mixed: label-reversal steps.
  std::vector<std::int64_t> reversal_steps = {20, 40, 60, 80};

  // Circles: length of each gradual transition window.
  std::int64_t circles_window = 5;
};

struct StreamData {
  std::string name;
  std::vector<BatchPtr> batches;
  std::size_t dim = 0;
  std::int64_t batch_size = 0;
  DriftSchedule schedule;
};

inline DriftSchedule schedule_of(const GeneratorSpec& spec) {
  DriftSchedule s;
  if (spec.stationary) return s;
  switch (spec.family) {
    case Family::sea:
      if (spec.sea_gradual) {
        s.kind = DriftSchedule::Kind::gradual;
        s.windows = {spec.sea_gradual_window};
        s.change_points = {spec.sea_gradual_window.first};
      } else {
        s.kind = DriftSchedule::Kind::abrupt;
        const std::int64_t q = spec.total_steps / 4;
        s.change_points = {q, 2 * q, 3 * q};
      }
      break;
    case Family::hyperplane:
      s.kind = DriftSchedule::Kind::gradual;  // continual, no marked points
      break;
    case Family::sine1:
    case Family::mixed:
      s.kind = DriftSchedule::Kind::abrupt;
      s.change_points = spec.reversal_steps;
      break;
    case Family::circles: {
      // Window starts double as the oracle baseline's drift times.
      s.kind = DriftSchedule::Kind::gradual;
      const std::int64_t q = spec.total_steps / 4;
      for (int j = 1; j <= 3; ++j) {
        s.windows.push_back({j * q, j * q + spec.circles_window});
        s.change_points.push_back(j * q);
      }
      break;
    }
    case Family::csv_file:
      break;
  }
  return s;
}

namespace detail {

inline int flip_noise(int label, double rate, Rng& rng) {
  if (rate > 0.0 && rng.bernoulli(rate)) return -label;
  return label;
}

// Probability of drawing from the new concept inside a transition window of
// `len` steps: a linear ramp strictly inside (0, 1).
inline double ramp(std::int64_t t, std::int64_t start, std::int64_t len) {
  return static_cast<double>(t - start + 1) / static_cast<double>(len + 1);
}

}  // namespace detail

inline StreamData generate(const GeneratorSpec& spec) {
  if (spec.family == Family::csv_file)
    throw std::invalid_argument("generate: csv_file requires load_csv");
  if (spec.total_steps <= 0 || spec.batch_size <= 0)
    throw std::invalid_argument("generate: steps and batch size must be > 0");

  StreamData out;
  out.batch_size = spec.batch_size;
  out.schedule = schedule_of(spec);
  Rng rng(derive_seed(spec.seed, {0x5eedu}));

  const std::int64_t b = spec.total_steps;
  const std::int64_t m = spec.batch_size;
  std::int64_t next_id = 0;

  // SEA concept thresholds in presentation order 3,2,4,1.
  const double sea_theta[4] = {7.0, 8.0, 9.5, 9.0};

  // Circles concepts: (cx, cy, r) with squared distance compared against r.
  const double circle[4][3] = {{0.2, 0.5, 0.15},
                               {0.4, 0.5, 0.2},
                               {0.6, 0.5, 0.25},
                               {0.8, 0.5, 0.3}};

  // Hyperplane coefficients and per-coordinate drift directions.
  constexpr std::size_t hyper_dim = 10;
  std::vector<double> hw(hyper_dim);
  std::vector<int> hdir(hyper_dim, 1);
  if (spec.family == Family::hyperplane)
    for (auto& c : hw) c = rng.uniform();

  for (std::int64_t t = 0; t < b; ++t) {
    auto batch = std::make_shared<Batch>();
    batch->time_step = t;
    batch->points.reserve(m);

    for (std::int64_t j = 0; j < m; ++j) {
      LabeledPoint p;
      p.id = next_id++;
      int label = 1;

      switch (spec.family) {
        case Family::sea: {
          p.x = {rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0),
                 rng.uniform(0.0, 10.0)};
          int concept_idx = 0;
          if (!spec.stationary) {
            if (spec.sea_gradual) {
              const auto [ws, we] = spec.sea_gradual_window;
              if (t < ws) concept_idx = 0;
              else if (t > we) concept_idx = 1;
              else concept_idx =
                  rng.bernoulli(detail::ramp(t, ws, we - ws + 1)) ? 1 : 0;
            } else {
              concept_idx = static_cast<int>(std::min<std::int64_t>(
                  t / std::max<std::int64_t>(1, b / 4), 3));
            }
          }
          label = (p.x[0] + p.x[1] <= sea_theta[concept_idx]) ? +1 : -1;
          break;
        }
        case Family::hyperplane: {
          p.x.resize(hyper_dim);
          for (auto& v : p.x) v = rng.uniform();
          double score = 0.0, threshold = 0.0;
          for (std::size_t i = 0; i < hyper_dim; ++i) {
            score += hw[i] * p.x[i];
            threshold += hw[i] * 0.5;
          }
          label = (score >= threshold) ? +1 : -1;
          if (!spec.stationary) {
            for (std::size_t i = 0; i < hyper_dim; ++i) {
              hw[i] += hdir[i] * spec.hyper_magnitude;
              if (rng.bernoulli(spec.hyper_reversal_prob)) hdir[i] = -hdir[i];
            }
          }
          break;
        }
        case Family::sine1: {
          p.x = {rng.uniform(), rng.uniform()};
          label = (p.x[1] <= std::sin(p.x[0])) ? +1 : -1;
          break;
        }
        case Family::mixed: {
          const double x1 = rng.bernoulli(0.5) ? 1.0 : 0.0;
          const double x2 = rng.bernoulli(0.5) ? 1.0 : 0.0;
          p.x = {x1, x2, rng.uniform(), rng.uniform()};
          int held = 0;
          if (x1 == 1.0) ++held;
          if (x2 == 1.0) ++held;
          if (p.x[3] < 0.5 + 0.3 * std::sin(3.0 * 3.14159265358979323846 *
                                            p.x[2]))
            ++held;
          label = (held >= 2) ? +1 : -1;
          break;
        }
        case Family::circles: {
          p.x = {rng.uniform(), rng.uniform()};
          int concept_idx = 0;
          if (!spec.stationary) {
            const std::int64_t q = b / 4;
            for (int c = 1; c <= 3; ++c) {
              const std::int64_t ws = c * q;
              if (t >= ws + spec.circles_window) concept_idx = c;
              else if (t >= ws) {
                if (rng.bernoulli(detail::ramp(t, ws, spec.circles_window)))
                  concept_idx = c;
                break;
              } else {
                break;
              }
            }
          }
          const double dx = p.x[0] - circle[concept_idx][0];
          const double dy = p.x[1] - circle[concept_idx][1];
          label = (dx * dx + dy * dy <= circle[concept_idx][2]) ? +1 : -1;
          break;
        }
        case Family::csv_file:
          break;
      }

      // Label reversals (SINE1 / Mixed): toggle after each passed drift step.
      if (!spec.stationary &&
          (spec.family == Family::sine1 || spec.family == Family::mixed)) {
        for (std::int64_t rs : spec.reversal_steps)
          if (t >= rs) label = -label;
      }

      p.label = detail::flip_noise(label, spec.noise_rate, rng);
      if (spec.add_intercept) p.x.push_back(spec.intercept_value);
      batch->points.push_back(std::move(p));
    }
    out.batches.push_back(std::move(batch));
  }
  out.dim = out.batches.front()->points.front().x.size();
  return out;
}

// Negate all labels from each listed step onward; two swaps restore the
// original regime.
inline void inject_label_swap(StreamData& stream,
                              const std::vector<std::int64_t>& at_steps) {
  std::set<std::int64_t> steps(at_steps.begin(), at_steps.end());
  bool flipped = false;
  std::vector<BatchPtr> rebuilt;
  rebuilt.reserve(stream.batches.size());
  for (const BatchPtr& old : stream.batches) {
    if (steps.count(old->time_step)) flipped = !flipped;
    if (!flipped) {
      rebuilt.push_back(old);
      continue;
    }
    auto fresh = std::make_shared<Batch>(*old);
    for (LabeledPoint& p : fresh->points) p.label = -p.label;
    rebuilt.push_back(std::move(fresh));
  }
  stream.batches = std::move(rebuilt);
}

// Rotate coordinates (i, j) of every point by angle_deg from each listed step
// onward; rotations accumulate across steps.
inline void inject_rotation(StreamData& stream,
                            const std::vector<std::int64_t>& at_steps,
                            std::pair<std::size_t, std::size_t> axes,
                            double angle_deg) {
  const auto [i, j] = axes;
  if (i == j || i >= stream.dim || j >= stream.dim)
    throw std::invalid_argument("inject_rotation: bad axis pair");
  std::set<std::int64_t> steps(at_steps.begin(), at_steps.end());
  const double base = angle_deg * 3.14159265358979323846 / 180.0;
  int applications = 0;
  std::vector<BatchPtr> rebuilt;
  rebuilt.reserve(stream.batches.size());
  for (const BatchPtr& old : stream.batches) {
    if (steps.count(old->time_step)) ++applications;
    if (applications == 0) {
      rebuilt.push_back(old);
      continue;
    }
    const double angle = base * applications;
    const double c = std::cos(angle), s = std::sin(angle);
    auto fresh = std::make_shared<Batch>(*old);
    for (LabeledPoint& p : fresh->points) {
      const double xi = p.x[i], xj = p.x[j];
      p.x[i] = c * xi - s * xj;
      p.x[j] = s * xi + c * xj;
    }
    rebuilt.push_back(std::move(fresh));
  }
  stream.batches = std::move(rebuilt);
}

struct CsvSpec {
  std::string path;
  std::string label_column;
  // Raw label value -> +1/-1. Empty accepts "1"/"+1"/"-1"/"0" (0 maps to -1).
  std::map<std::string, int> label_map;
  std::vector<std::string> categorical;  // one-hot encoded columns
  bool scale_to_unit = false;            // min-max scale numeric columns
  bool add_intercept = true;
  std::int64_t batch_size = 0;    // if 0, derived as rows / total_steps
  std::int64_t total_steps = 100;
  std::string name = "csv";
};

inline StreamData load_csv(const CsvSpec& spec) {
  auto rows = csv_read_file(spec.path);
  if (rows.size() < 2)
    throw std::runtime_error(spec.path + ": need a header row and data rows");
  const auto& header = rows.front();
  const std::size_t ncols = header.size();

  auto col_index = [&](const std::string& name) {
    for (std::size_t c = 0; c < ncols; ++c)
      if (header[c] == name) return c;
    throw std::runtime_error(spec.path + ": no column named '" + name + "'");
  };
  const std::size_t label_col = col_index(spec.label_column);
  std::set<std::size_t> cat_cols;
  for (const auto& name : spec.categorical) cat_cols.insert(col_index(name));

  for (std::size_t r = 1; r < rows.size(); ++r)
    if (rows[r].size() != ncols)
      throw std::runtime_error(spec.path + ": row " + std::to_string(r + 1) +
                               ": expected " + std::to_string(ncols) +
                               " fields, got " +
                               std::to_string(rows[r].size()));

  auto map_label = [&](const std::string& raw, std::size_t r) {
    if (!spec.label_map.empty()) {
      auto it = spec.label_map.find(raw);
      if (it == spec.label_map.end() || (it->second != 1 && it->second != -1))
        throw std::runtime_error(spec.path + ": row " + std::to_string(r + 1) +
                                 ": unmappable label '" + raw + "'");
      return it->second;
    }
    if (raw == "1" || raw == "+1") return +1;
    if (raw == "-1" || raw == "0") return -1;
    throw std::runtime_error(spec.path + ": row " + std::to_string(r + 1) +
                             ": unmappable label '" + raw +
                             "' (provide a label map)");
  };

  // Category values in order of first appearance, for a stable encoding.
  std::map<std::size_t, std::vector<std::string>> categories;
  for (std::size_t c : cat_cols) categories[c] = {};
  for (std::size_t r = 1; r < rows.size(); ++r) {
    for (std::size_t c : cat_cols) {
      auto& vals = categories[c];
      if (std::find(vals.begin(), vals.end(), rows[r][c]) == vals.end())
        vals.push_back(rows[r][c]);
    }
  }

  std::vector<std::size_t> numeric_cols;
  for (std::size_t c = 0; c < ncols; ++c)
    if (c != label_col && !cat_cols.count(c)) numeric_cols.push_back(c);

  auto parse_num = [&](const std::string& raw, std::size_t r) {
    try {
      std::size_t used = 0;
      const double v = std::stod(raw, &used);
      if (used != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error(spec.path + ": row " + std::to_string(r + 1) +
                               ": non-numeric value '" + raw + "'");
    }
  };

  std::vector<double> mins(ncols, 0.0), maxs(ncols, 0.0);
  if (spec.scale_to_unit) {
    for (std::size_t k = 0; k < numeric_cols.size(); ++k) {
      const std::size_t c = numeric_cols[k];
      for (std::size_t r = 1; r < rows.size(); ++r) {
        const double v = parse_num(rows[r][c], r);
        if (r == 1 || v < mins[c]) mins[c] = v;
        if (r == 1 || v > maxs[c]) maxs[c] = v;
      }
    }
  }

  const std::int64_t nrows = static_cast<std::int64_t>(rows.size()) - 1;
  std::int64_t m = spec.batch_size;
  if (m <= 0) m = std::max<std::int64_t>(1, nrows / spec.total_steps);
  const std::int64_t steps = nrows / m;
  if (steps == 0)
    throw std::runtime_error(spec.path + ": fewer rows than one batch");

  StreamData out;
  out.name = spec.name;
  out.batch_size = m;
  std::int64_t next_id = 0;
  for (std::int64_t t = 0; t < steps; ++t) {
    auto batch = std::make_shared<Batch>();
    batch->time_step = t;
    for (std::int64_t j = 0; j < m; ++j) {
      const std::size_t r = static_cast<std::size_t>(t * m + j) + 1;
      LabeledPoint p;
      p.id = next_id++;
      p.label = map_label(rows[r][label_col], r);
      for (std::size_t c = 0; c < ncols; ++c) {
        if (c == label_col) continue;
        if (cat_cols.count(c)) {
          for (const auto& val : categories[c])
            p.x.push_back(rows[r][c] == val ? 1.0 : 0.0);
        } else {
          double v = parse_num(rows[r][c], r);
          if (spec.scale_to_unit && maxs[c] > mins[c])
            v = (v - mins[c]) / (maxs[c] - mins[c]);
          p.x.push_back(v);
        }
      }
      if (spec.add_intercept) p.x.push_back(1.0);
      batch->points.push_back(std::move(p));
    }
    out.batches.push_back(std::move(batch));
  }
  out.dim = out.batches.front()->points.front().x.size();
  return out;
}

}  // namespace driftsurf
