#pragma once

#include "richberg/core.hpp"
#include "richberg/jets.hpp"
#include "richberg/smoothmax.hpp"
#include "richberg/subequations.hpp"
#include "richberg/grid.hpp"
#include "richberg/localapprox.hpp"
#include "richberg/gluing.hpp"
#include "richberg/scenario.hpp"
#include "richberg/suites.hpp"
