#pragma once

// Umbrella header: actuation-aware support regions for multi-contact
// legged systems, plus the planners built on top of them.

#include "feasreg/common.hpp"
#include "feasreg/constraints.hpp"
#include "feasreg/geometry.hpp"
#include "feasreg/global_region.hpp"
#include "feasreg/linprog.hpp"
#include "feasreg/model.hpp"
#include "feasreg/planner.hpp"
#include "feasreg/region.hpp"
#include "feasreg/scenario.hpp"
#include "feasreg/svg.hpp"
#include "feasreg/terrain.hpp"
