#pragma once

// Umbrella header for the nonlocal-exchange lab library.

#include "compensated.hpp"
#include "config.hpp"
#include "convergence_lab.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "local_energy.hpp"
#include "nonlocal_energy.hpp"
#include "pair_sum.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "relaxer.hpp"
#include "rng.hpp"
#include "vec3.hpp"
