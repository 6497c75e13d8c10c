// Copyright 2026 betanmf contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "betanmf/bench.hpp"
#include "betanmf/diagnostics.hpp"
#include "betanmf/divergence.hpp"
#include "betanmf/io.hpp"
#include "betanmf/solver.hpp"
#include "betanmf/synthetic.hpp"
#include "betanmf/types.hpp"
#include "betanmf/updates.hpp"
