// Copyright 2026 The weakval Authors
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

#include "weakval/apparatus.hpp"
#include "weakval/classical_meter.hpp"
#include "weakval/error.hpp"
#include "weakval/improper_dist.hpp"
#include "weakval/io.hpp"
#include "weakval/lam.hpp"
#include "weakval/meter_readout.hpp"
#include "weakval/numeric.hpp"
#include "weakval/pathways.hpp"
#include "weakval/quantum_core.hpp"
#include "weakval/scattering.hpp"
