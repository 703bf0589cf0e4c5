// Copyright 2026 The dpgnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Umbrella header.

#include "dpgnn/accountant.hpp"
#include "dpgnn/autodiff.hpp"
#include "dpgnn/commands.hpp"
#include "dpgnn/datagen.hpp"
#include "dpgnn/dp.hpp"
#include "dpgnn/errors.hpp"
#include "dpgnn/explainer.hpp"
#include "dpgnn/graph.hpp"
#include "dpgnn/graph_ops.hpp"
#include "dpgnn/io.hpp"
#include "dpgnn/losses.hpp"
#include "dpgnn/metrics.hpp"
#include "dpgnn/model.hpp"
#include "dpgnn/nn.hpp"
#include "dpgnn/tensor.hpp"
#include "dpgnn/training.hpp"
