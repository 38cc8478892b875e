// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "errors.hpp"
#include "numerics.hpp"
#include "model.hpp"
#include "policy.hpp"
#include "dynamics.hpp"
#include "trajectories.hpp"
#include "economics.hpp"
#include "analysis.hpp"
#include "optimizer.hpp"
#include "sampling.hpp"
#include "config.hpp"
#include "io.hpp"
