#pragma once

#include "wcopt/dataset.hpp"
#include "wcopt/domain.hpp"
#include "wcopt/harness.hpp"
#include "wcopt/losses.hpp"
#include "wcopt/problem.hpp"
#include "wcopt/problems.hpp"
#include "wcopt/prox.hpp"
#include "wcopt/prox_point.hpp"
#include "wcopt/report.hpp"
#include "wcopt/rng.hpp"
#include "wcopt/stationarity.hpp"
#include "wcopt/stochastic.hpp"
#include "wcopt/switching.hpp"
#include "wcopt/vec.hpp"
