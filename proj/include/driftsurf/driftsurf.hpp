#pragma once

#include "driftsurf/adaptive.hpp"
#include "driftsurf/csv.hpp"
#include "driftsurf/data.hpp"
#include "driftsurf/harness.hpp"
#include "driftsurf/linear_model.hpp"
#include "driftsurf/mddm.hpp"
#include "driftsurf/optimizers.hpp"
#include "driftsurf/probes.hpp"
#include "driftsurf/rng.hpp"
#include "driftsurf/streams.hpp"
