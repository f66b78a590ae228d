#pragma once

#include "errors.hpp"
#include "freq.hpp"
#include "io.hpp"
#include "mtdc/analysis.hpp"
#include "mtdc/model.hpp"
#include "mtdc/system.hpp"
#include "polynomial.hpp"
#include "rational.hpp"
#include "roots.hpp"
#include "sim.hpp"
#include "vgap.hpp"
