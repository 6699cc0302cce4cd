#pragma once

// Umbrella header for the receding-horizon LQ control library.

#include "rhc/adaptive.hpp"
#include "rhc/bounds.hpp"
#include "rhc/errors.hpp"
#include "rhc/linalg.hpp"
#include "rhc/performance.hpp"
#include "rhc/riccati.hpp"
#include "rhc/rng.hpp"
#include "rhc/stats.hpp"
#include "rhc/sysid.hpp"
#include "rhc/types.hpp"
