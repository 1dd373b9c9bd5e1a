#pragma once

#include "aknn/config.hpp"
#include "aknn/cube_family.hpp"
#include "aknn/error.hpp"
#include "aknn/estimators.hpp"
#include "aknn/harness.hpp"
#include "aknn/lowerbound.hpp"
#include "aknn/norm.hpp"
#include "aknn/benchmark_suite.hpp"
#include "aknn/parallel.hpp"
#include "aknn/points.hpp"
#include "aknn/report.hpp"
#include "aknn/rng.hpp"
#include "aknn/spatial_index.hpp"
#include "aknn/theory.hpp"
#include "aknn/worlds.hpp"
