#pragma once

#include "decontam/channel_model.hpp"
#include "decontam/config.hpp"
#include "decontam/errors.hpp"
#include "decontam/estimators.hpp"
#include "decontam/metrics_theory.hpp"
#include "decontam/network_topology.hpp"
#include "decontam/numerics.hpp"
#include "decontam/quadrature.hpp"
#include "decontam/random.hpp"
#include "decontam/signal_stage.hpp"
#include "decontam/sim_harness.hpp"
