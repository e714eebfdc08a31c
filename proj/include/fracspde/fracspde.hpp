#pragma once

// Umbrella header for the fracspde library: a numerical laboratory for the
// 1-D stochastic nonlocal reaction-diffusion equation with fractional
// Laplacian diffusion and multiplicative fractional Brownian noise.

#include "fracspde/model.hpp"
#include "fracspde/quadrature.hpp"
#include "fracspde/special.hpp"
#include "fracspde/fd_operator.hpp"
#include "fracspde/fbm.hpp"
#include "fracspde/simulate.hpp"
#include "fracspde/bounds.hpp"
#include "fracspde/montecarlo.hpp"
#include "fracspde/config.hpp"
#include "fracspde/io.hpp"
