#pragma once

#include "gtsr/config.hpp"
#include "gtsr/denoisers.hpp"
#include "gtsr/harness.hpp"
#include "gtsr/model.hpp"
#include "gtsr/normal.hpp"
#include "gtsr/quadrature.hpp"
#include "gtsr/recovery.hpp"
#include "gtsr/rng.hpp"
#include "gtsr/state_evolution.hpp"
#include "gtsr/transform.hpp"
#include "gtsr/types.hpp"
