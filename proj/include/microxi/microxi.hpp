#pragma once

#include "microxi/errors.hpp"
#include "microxi/rng.hpp"
#include "microxi/quadrature.hpp"
#include "microxi/isometry.hpp"
#include "microxi/spectrum.hpp"
#include "microxi/spectral_chain.hpp"
#include "microxi/charpoly.hpp"
#include "microxi/sinekernel.hpp"
#include "microxi/xinf.hpp"
#include "microxi/formulas.hpp"
#include "microxi/stats.hpp"
#include "microxi/linstats.hpp"
#include "microxi/json_io.hpp"
#include "microxi/harness.hpp"
