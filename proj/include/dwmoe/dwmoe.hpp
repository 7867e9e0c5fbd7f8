#pragma once

// Umbrella header.

#include "dwmoe/data.hpp"
#include "dwmoe/dates.hpp"
#include "dwmoe/ensemble.hpp"
#include "dwmoe/eval.hpp"
#include "dwmoe/json_io.hpp"
#include "dwmoe/metrics.hpp"
#include "dwmoe/mlp.hpp"
#include "dwmoe/partition.hpp"
#include "dwmoe/rng.hpp"
