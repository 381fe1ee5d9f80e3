#ifndef SVMPLAN_PLANNER_HPP
#define SVMPLAN_PLANNER_HPP

#include "svmplan/planner/budget.hpp"
#include "svmplan/planner/export.hpp"
#include "svmplan/planner/metrics.hpp"
#include "svmplan/planner/modes.hpp"
#include "svmplan/planner/raster.hpp"
#include "svmplan/planner/service.hpp"

#endif // SVMPLAN_PLANNER_HPP
