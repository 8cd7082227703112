// Copyright 2026 The hbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Umbrella header for the numeric engine. The HTTP service lives in
// hbench/service.hpp and is included separately (it pulls in cpp-httplib).

#include "hbench/error.hpp"
#include "hbench/matrix.hpp"
#include "hbench/network.hpp"
#include "hbench/spec_io.hpp"
#include "hbench/operators.hpp"
#include "hbench/propagation.hpp"
#include "hbench/conjoint.hpp"
#include "hbench/weighting.hpp"
#include "hbench/scoring.hpp"
#include "hbench/dynamics.hpp"
#include "hbench/scenario.hpp"
