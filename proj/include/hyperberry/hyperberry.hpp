// Copyright 2026 The Hyperberry Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "hyperberry/bounds.hpp"
#include "hyperberry/constants_io.hpp"
#include "hyperberry/exact.hpp"
#include "hyperberry/gaussian.hpp"
#include "hyperberry/grid_config.hpp"
#include "hyperberry/lattice.hpp"
#include "hyperberry/params.hpp"
#include "hyperberry/report.hpp"
#include "hyperberry/stirling.hpp"
#include "hyperberry/sweep.hpp"
#include "hyperberry/verification.hpp"
