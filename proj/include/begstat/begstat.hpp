#pragma once

#include "begstat/arith.hpp"
#include "begstat/beg.hpp"
#include "begstat/groups.hpp"
#include "begstat/io.hpp"
#include "begstat/matrix_models.hpp"
#include "begstat/measures.hpp"
#include "begstat/montecarlo.hpp"
#include "begstat/oracles.hpp"
#include "begstat/qseries.hpp"
#include "begstat/snf.hpp"
