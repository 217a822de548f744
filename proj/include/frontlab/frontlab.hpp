#pragma once

#include "frontlab/analysis.hpp"
#include "frontlab/bounds.hpp"
#include "frontlab/error.hpp"
#include "frontlab/geometry.hpp"
#include "frontlab/nonlinearity.hpp"
#include "frontlab/ode.hpp"
#include "frontlab/solver.hpp"
#include "frontlab/waves.hpp"
