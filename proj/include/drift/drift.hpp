#pragma once

#include "drift/algorithms.hpp"
#include "drift/chain.hpp"
#include "drift/errors.hpp"
#include "drift/estimator.hpp"
#include "drift/fitness.hpp"
#include "drift/oracle.hpp"
#include "drift/parallel.hpp"
#include "drift/potentials.hpp"
#include "drift/process.hpp"
#include "drift/quadrature.hpp"
#include "drift/rng.hpp"
#include "drift/theorems.hpp"
