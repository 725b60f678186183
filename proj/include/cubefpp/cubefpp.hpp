#pragma once

#include "cubefpp/analytic.hpp"
#include "cubefpp/analytic_oracle.hpp"
#include "cubefpp/btp.hpp"
#include "cubefpp/checks.hpp"
#include "cubefpp/common.hpp"
#include "cubefpp/experiments.hpp"
#include "cubefpp/fpp.hpp"
#include "cubefpp/hypercube.hpp"
#include "cubefpp/io.hpp"
#include "cubefpp/pilot.hpp"
#include "cubefpp/quadrature.hpp"
#include "cubefpp/rng.hpp"
#include "cubefpp/stats.hpp"
#include "cubefpp/walks.hpp"
