#pragma once

#include "filmsolve/config.hpp"
#include "filmsolve/diagnostics.hpp"
#include "filmsolve/integrator.hpp"
#include "filmsolve/io.hpp"
#include "filmsolve/model.hpp"
#include "filmsolve/rhs.hpp"
#include "filmsolve/runner.hpp"
#include "filmsolve/spectral.hpp"
#include "filmsolve/version.hpp"
