#pragma once

// Umbrella header: the full directed-sequence library.

#include "randkol/bit_queue.hpp"
#include "randkol/core.hpp"
#include "randkol/csv.hpp"
#include "randkol/errors.hpp"
#include "randkol/exact.hpp"
#include "randkol/kahan.hpp"
#include "randkol/rng.hpp"
#include "randkol/sources.hpp"
#include "randkol/stats.hpp"
#include "randkol/types.hpp"
#include "randkol/verify.hpp"
