#pragma once

#include "sde_gridopt/asymptotics.hpp"
#include "sde_gridopt/error.hpp"
#include "sde_gridopt/grid.hpp"
#include "sde_gridopt/matfun.hpp"
#include "sde_gridopt/model.hpp"
#include "sde_gridopt/rng.hpp"
#include "sde_gridopt/solver.hpp"
