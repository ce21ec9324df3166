#pragma once

// Everything in one include.

#include "logitnet/bench.hpp"
#include "logitnet/core.hpp"
#include "logitnet/evaluation.hpp"
#include "logitnet/exact_oracle.hpp"
#include "logitnet/imputation.hpp"
#include "logitnet/io.hpp"
#include "logitnet/model_selection.hpp"
#include "logitnet/parallel.hpp"
#include "logitnet/seplogit.hpp"
#include "logitnet/simulation.hpp"
#include "logitnet/solver.hpp"
#include "logitnet/spatial_weights.hpp"
