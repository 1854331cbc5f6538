#pragma once

#include "ctrlgame/algebra.hpp"
#include "ctrlgame/catalogue.hpp"
#include "ctrlgame/catalogue_io.hpp"
#include "ctrlgame/error.hpp"
#include "ctrlgame/numeric.hpp"
#include "ctrlgame/profile.hpp"
#include "ctrlgame/report.hpp"
#include "ctrlgame/solver.hpp"
#include "ctrlgame/valuation.hpp"
