#pragma once

#include "dynpca/bbox.hpp"
#include "dynpca/cpca.hpp"
#include "dynpca/error.hpp"
#include "dynpca/geometry.hpp"
#include "dynpca/grid.hpp"
#include "dynpca/io.hpp"
#include "dynpca/linalg.hpp"
#include "dynpca/moments.hpp"
