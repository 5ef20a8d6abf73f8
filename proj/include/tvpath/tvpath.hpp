#pragma once

// Everything in one include.

#include "tvpath/signal.hpp"
#include "tvpath/path_solver.hpp"
#include "tvpath/restoration.hpp"
#include "tvpath/lambda_select.hpp"
#include "tvpath/stream.hpp"
#include "tvpath/baselines.hpp"
#include "tvpath/oracle.hpp"
#include "tvpath/io.hpp"
#include "tvpath/simbench.hpp"
