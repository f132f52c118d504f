#ifndef QCKM_QCKM_HPP
#define QCKM_QCKM_HPP

#include "bench.hpp"
#include "core.hpp"
#include "datasets.hpp"
#include "kmeans.hpp"
#include "pipeline.hpp"
#include "qubo.hpp"
#include "rng.hpp"
#include "sketch.hpp"
#include "solver.hpp"
#include "statevec.hpp"

#endif
