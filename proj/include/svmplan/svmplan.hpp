#ifndef SVMPLAN_SVMPLAN_HPP
#define SVMPLAN_SVMPLAN_HPP

#include "svmplan/dataset.hpp"
#include "svmplan/error.hpp"
#include "svmplan/features.hpp"
#include "svmplan/geodata/environment_map.hpp"
#include "svmplan/geodata/geodesy.hpp"
#include "svmplan/geodata/map_io.hpp"
#include "svmplan/planner.hpp"
#include "svmplan/svm/model_io.hpp"
#include "svmplan/svm/models.hpp"
#include "svmplan/tuning.hpp"

#endif // SVMPLAN_SVMPLAN_HPP
