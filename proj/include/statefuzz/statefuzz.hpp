#pragma once

// Umbrella header for the whole toolkit.

#include "statefuzz/campaign.hpp"
#include "statefuzz/cells.hpp"
#include "statefuzz/checkpoint.hpp"
#include "statefuzz/config.hpp"
#include "statefuzz/corpus.hpp"
#include "statefuzz/coverage.hpp"
#include "statefuzz/harness_config.hpp"
#include "statefuzz/metrics.hpp"
#include "statefuzz/model.hpp"
#include "statefuzz/objectives.hpp"
#include "statefuzz/report.hpp"
#include "statefuzz/retrain.hpp"
#include "statefuzz/rng.hpp"
#include "statefuzz/synthesis.hpp"
#include "statefuzz/tape.hpp"
#include "statefuzz/tensor.hpp"
#include "statefuzz/trace.hpp"
#include "statefuzz/train.hpp"
