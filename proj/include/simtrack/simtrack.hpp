// Copyright 2026 The SimTrack Authors.
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

#include "simtrack/assignment.hpp"
#include "simtrack/baselines.hpp"
#include "simtrack/bev_map.hpp"
#include "simtrack/config.hpp"
#include "simtrack/experiment.hpp"
#include "simtrack/geometry.hpp"
#include "simtrack/io.hpp"
#include "simtrack/losses.hpp"
#include "simtrack/metrics.hpp"
#include "simtrack/oracle_head.hpp"
#include "simtrack/rng.hpp"
#include "simtrack/scenario.hpp"
#include "simtrack/targets.hpp"
#include "simtrack/tracker.hpp"
