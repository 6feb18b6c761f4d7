#pragma once

#include "cpmol/assembly.hpp"
#include "cpmol/band.hpp"
#include "cpmol/convergence.hpp"
#include "cpmol/errors.hpp"
#include "cpmol/geometry.hpp"
#include "cpmol/io.hpp"
#include "cpmol/mesh.hpp"
#include "cpmol/operators.hpp"
#include "cpmol/problems.hpp"
#include "cpmol/reference_curve.hpp"
#include "cpmol/timestep.hpp"
