// Copyright 2026 The SCRNN Authors
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

#include "scrnn/complex.hpp"
#include "scrnn/config.hpp"
#include "scrnn/error.hpp"
#include "scrnn/filters.hpp"
#include "scrnn/io.hpp"
#include "scrnn/metrics.hpp"
#include "scrnn/model.hpp"
#include "scrnn/recurrent.hpp"
#include "scrnn/sparse.hpp"
#include "scrnn/spikes.hpp"
#include "scrnn/synth.hpp"
#include "scrnn/train.hpp"
