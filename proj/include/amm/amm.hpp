//
// amm.hpp - umbrella header for the approximate matrix multiplication library.
//

#pragma once

#include "amm/approx.hpp"
#include "amm/bench.hpp"
#include "amm/decomp.hpp"
#include "amm/errors.hpp"
#include "amm/io.hpp"
#include "amm/kernel.hpp"
#include "amm/matrix.hpp"
#include "amm/rescale.hpp"
#include "amm/rng.hpp"
#include "amm/select.hpp"
#include "amm/verify.hpp"
