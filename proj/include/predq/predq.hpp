#pragma once

// Umbrella header for the scheduling-with-predictions toolkit: M/G/1
// response-time formulas under size-based policies driven by either true or
// predicted job sizes, a matching discrete-event simulator, and experiment
// plumbing for load sweeps and prediction-noise sweeps.

#include "predq/analytic.hpp"
#include "predq/config.hpp"
#include "predq/distributions.hpp"
#include "predq/errors.hpp"
#include "predq/experiment.hpp"
#include "predq/interpolant.hpp"
#include "predq/models.hpp"
#include "predq/priority.hpp"
#include "predq/quadrature.hpp"
#include "predq/rng.hpp"
#include "predq/simulator.hpp"
#include "predq/srpt.hpp"
#include "predq/two_type.hpp"
