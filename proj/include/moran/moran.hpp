#pragma once

#include "moran/catalog.hpp"
#include "moran/dynamics.hpp"
#include "moran/entropy.hpp"
#include "moran/errors.hpp"
#include "moran/format.hpp"
#include "moran/kernel.hpp"
#include "moran/process.hpp"
#include "moran/sampler.hpp"
#include "moran/simplex_lattice.hpp"
#include "moran/stationary.hpp"
#include "moran/sweep.hpp"
