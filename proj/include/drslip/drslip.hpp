#pragma once

#include "bench.hpp"
#include "body_planner.hpp"
#include "com_planner.hpp"
#include "config.hpp"
#include "error.hpp"
#include "floquet.hpp"
#include "geometry.hpp"
#include "mathieu.hpp"
#include "ode.hpp"
#include "optimize.hpp"
#include "pendulum.hpp"
