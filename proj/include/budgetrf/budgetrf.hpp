#pragma once

#include "budgetrf/dataio.hpp"
#include "budgetrf/dataset.hpp"
#include "budgetrf/errors.hpp"
#include "budgetrf/forest.hpp"
#include "budgetrf/impurity.hpp"
#include "budgetrf/metrics.hpp"
#include "budgetrf/oracle.hpp"
#include "budgetrf/random.hpp"
#include "budgetrf/stumps.hpp"
#include "budgetrf/tree.hpp"
