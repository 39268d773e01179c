#pragma once

#include "wattbench/carbon.hpp"
#include "wattbench/catalog.hpp"
#include "wattbench/error.hpp"
#include "wattbench/estimate.hpp"
#include "wattbench/format.hpp"
#include "wattbench/measure.hpp"
#include "wattbench/quantities.hpp"
#include "wattbench/report.hpp"
#include "wattbench/tokens.hpp"
#include "wattbench/trace.hpp"
#include "wattbench/validate.hpp"
