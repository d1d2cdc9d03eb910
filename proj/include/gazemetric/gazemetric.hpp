#pragma once

// Umbrella header: the full expertise-classification pipeline.

#include "gazemetric/errors.hpp"
#include "gazemetric/events.hpp"
#include "gazemetric/features.hpp"
#include "gazemetric/harness.hpp"
#include "gazemetric/ingest.hpp"
#include "gazemetric/metrics.hpp"
#include "gazemetric/model_io.hpp"
#include "gazemetric/report_io.hpp"
#include "gazemetric/rng.hpp"
#include "gazemetric/svm.hpp"
#include "gazemetric/synth.hpp"
#include "gazemetric/types.hpp"
