#pragma once

// Umbrella header for the numerical library (no config or CLI layer).

#include "ltg/analytic.hpp"
#include "ltg/errors.hpp"
#include "ltg/fitting.hpp"
#include "ltg/measurement.hpp"
#include "ltg/optics.hpp"
#include "ltg/parallel.hpp"
#include "ltg/random.hpp"
#include "ltg/rtn.hpp"
#include "ltg/series.hpp"
#include "ltg/slm.hpp"
#include "ltg/wcp_table.hpp"
