#pragma once

// Umbrella header.

#include "mpfrac/types.hpp"
#include "mpfrac/materials.hpp"
#include "mpfrac/geometry.hpp"
#include "mpfrac/mesh.hpp"
#include "mpfrac/phasefield.hpp"
#include "mpfrac/cohesive.hpp"
#include "mpfrac/linalg.hpp"
#include "mpfrac/solver.hpp"
#include "mpfrac/microstructure.hpp"
#include "mpfrac/config.hpp"
#include "mpfrac/io.hpp"
