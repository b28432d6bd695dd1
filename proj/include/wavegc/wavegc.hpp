// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header.

#pragma once

#include "wavegc/adaptive.hpp"
#include "wavegc/chebyshev.hpp"
#include "wavegc/fastpath.hpp"
#include "wavegc/graph.hpp"
#include "wavegc/io.hpp"
#include "wavegc/kernel_conv.hpp"
#include "wavegc/spectrum.hpp"
#include "wavegc/theory.hpp"
#include "wavegc/wavelet_bank.hpp"
