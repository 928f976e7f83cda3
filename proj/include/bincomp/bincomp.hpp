#pragma once

// Umbrella header for the bincomp library: factorization of a real matrix
// into a binary component factor and a real mixing factor, by enumerating
// hypercube vertices of the affine hull (or span) of the data columns.

#include "bincomp/assignment.hpp"
#include "bincomp/box_feasibility.hpp"
#include "bincomp/common.hpp"
#include "bincomp/experiments.hpp"
#include "bincomp/factorize.hpp"
#include "bincomp/least_squares.hpp"
#include "bincomp/lifting.hpp"
#include "bincomp/manifest.hpp"
#include "bincomp/matrix_io.hpp"
#include "bincomp/parallel.hpp"
#include "bincomp/pivots.hpp"
#include "bincomp/rng.hpp"
#include "bincomp/svd.hpp"
#include "bincomp/vertex_enum.hpp"
