#pragma once

#include "stkrr/error.hpp"
#include "stkrr/estimator.hpp"
#include "stkrr/golden_section.hpp"
#include "stkrr/kernel.hpp"
#include "stkrr/random.hpp"
#include "stkrr/rates.hpp"
#include "stkrr/risk.hpp"
#include "stkrr/selection.hpp"
#include "stkrr/simulate.hpp"
#include "stkrr/spectral.hpp"
