#pragma once

#include "subdiff/age/checks.hpp"
#include "subdiff/age/cohorts.hpp"
#include "subdiff/age/homogeneous.hpp"
#include "subdiff/age/space.hpp"
#include "subdiff/core/errors.hpp"
#include "subdiff/core/hazard.hpp"
#include "subdiff/core/initial_data.hpp"
#include "subdiff/core/kernel.hpp"
#include "subdiff/core/rng.hpp"
#include "subdiff/core/space_grid.hpp"
#include "subdiff/ctrw/particles.hpp"
#include "subdiff/ctrw/statistics.hpp"
#include "subdiff/frac/identities.hpp"
#include "subdiff/frac/memory.hpp"
#include "subdiff/frac/mittag_leffler.hpp"
#include "subdiff/frac/solvers.hpp"
#include "subdiff/harness/config.hpp"
#include "subdiff/harness/csv.hpp"
#include "subdiff/harness/experiments.hpp"
#include "subdiff/laplace/identities.hpp"
#include "subdiff/laplace/lemma.hpp"
#include "subdiff/laplace/transform.hpp"
#include "subdiff/numerics/quadrature.hpp"
