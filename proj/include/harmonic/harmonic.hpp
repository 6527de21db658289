#pragma once

#include "harmonic/error.hpp"
#include "harmonic/series.hpp"
#include "harmonic/moebius.hpp"
#include "harmonic/analytic.hpp"
#include "harmonic/harmonic_map.hpp"
#include "harmonic/roots.hpp"
#include "harmonic/dynamics.hpp"
#include "harmonic/linearization.hpp"
#include "harmonic/hardy.hpp"
#include "harmonic/expr.hpp"
#include "harmonic/io.hpp"
#include "harmonic/selftest.hpp"
