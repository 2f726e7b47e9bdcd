// Copyright 2026 The UTC-EQ Authors.
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

// Umbrella header.

#pragma once

#include "utc_eq/dag_cfr.hpp"
#include "utc_eq/deviation.hpp"
#include "utc_eq/dynamics.hpp"
#include "utc_eq/evaluation.hpp"
#include "utc_eq/fixed_point.hpp"
#include "utc_eq/game.hpp"
#include "utc_eq/game_io.hpp"
#include "utc_eq/games.hpp"
#include "utc_eq/harness.hpp"
#include "utc_eq/regret_matching.hpp"
#include "utc_eq/sequence_form.hpp"
#include "utc_eq/tfdp.hpp"
#include "utc_eq/utc_dag.hpp"
