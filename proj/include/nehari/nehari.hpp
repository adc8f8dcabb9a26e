#pragma once

#include "nehari/errors.hpp"
#include "nehari/grid.hpp"
#include "nehari/expression.hpp"
#include "nehari/model.hpp"
#include "nehari/spectrum.hpp"
#include "nehari/hypotheses.hpp"
#include "nehari/fibering.hpp"
#include "nehari/solve.hpp"
#include "nehari/verify.hpp"
#include "nehari/config.hpp"
#include "nehari/report.hpp"
