// lambqed.hpp: Umbrella header for the core library (Eigen only).
// heatmap.hpp is separate because it needs libpng.

#pragma once

#include "lambqed/analytic.hpp"
#include "lambqed/config.hpp"
#include "lambqed/dynamics.hpp"
#include "lambqed/hilbert.hpp"
#include "lambqed/io.hpp"
#include "lambqed/metrics.hpp"
#include "lambqed/model.hpp"
#include "lambqed/ode.hpp"
#include "lambqed/sweep.hpp"
#include "lambqed/verify.hpp"
