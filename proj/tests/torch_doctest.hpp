// Copyright 2026 The Guide Bidding Authors.
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

// doctest for suites that also use libtorch. libtorch defines a glog-style
// CHECK macro; dropping it here lets doctest's CHECK win regardless of the
// order in which later headers pull torch in.

#include <torch/torch.h>

#undef CHECK
#include "doctest.h"
