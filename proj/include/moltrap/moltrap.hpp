#pragma once

#include "moltrap/angular.hpp"
#include "moltrap/config.hpp"
#include "moltrap/csv.hpp"
#include "moltrap/errors.hpp"
#include "moltrap/hyperfine.hpp"
#include "moltrap/linalg.hpp"
#include "moltrap/magic.hpp"
#include "moltrap/model.hpp"
#include "moltrap/polarizability.hpp"
#include "moltrap/potentials.hpp"
#include "moltrap/radial.hpp"
#include "moltrap/roots.hpp"
#include "moltrap/units.hpp"
#include "moltrap/wigner.hpp"
