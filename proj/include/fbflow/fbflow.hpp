#pragma once

// Solvers for structured monotone inclusions 0 in dPhi(x) + B(x) with Phi
// convex l.s.c. and B cocoercive: splitting iterations, their continuous
// flows, descent diagnostics, and a certified instance gallery.

#include "fbflow/core.hpp"
#include "fbflow/proximable.hpp"
#include "fbflow/cocoercive.hpp"
#include "fbflow/operator_checks.hpp"
#include "fbflow/problem.hpp"
#include "fbflow/trace.hpp"
#include "fbflow/lyapunov.hpp"
#include "fbflow/flows.hpp"
#include "fbflow/splitters.hpp"
#include "fbflow/gallery.hpp"
