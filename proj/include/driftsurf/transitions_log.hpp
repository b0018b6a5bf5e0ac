#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftsurf/harness.hpp"

namespace driftsurf {

inline nlohmann::json transition_to_json(const TrialTransition& t) {
  return {{"trial", t.trial},
          {"algorithm", t.algorithm},
          {"time_step", t.event.time_step},
          {"kind", t.event.kind},
          {"trigger", t.event.trigger},
          {"from_state", t.event.from_state},
          {"to_state", t.event.to_state},
          {"risk_predictive", t.event.risk_predictive},
          {"risk_other", t.event.risk_other},
          {"model_id_before", t.event.model_id_before},
          {"model_id_after", t.event.model_id_after}};
}

// One JSON object per line.
inline void write_transitions_log(const std::string& path,
                                  const std::vector<TrialTransition>& events) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const TrialTransition& t : events) out << transition_to_json(t) << "\n";
}

}  // namespace driftsurf
