// Copyright 2026 The VPT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS-IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VPT_VPT_HPP_
#define VPT_VPT_HPP_

#include "vpt/array.hpp"
#include "vpt/autodiff.hpp"
#include "vpt/baselines.hpp"
#include "vpt/checkpoint.hpp"
#include "vpt/data.hpp"
#include "vpt/distributions.hpp"
#include "vpt/errors.hpp"
#include "vpt/estimator.hpp"
#include "vpt/flow.hpp"
#include "vpt/optim.hpp"
#include "vpt/polya_tree.hpp"
#include "vpt/special.hpp"
#include "vpt/train.hpp"

#endif  // VPT_VPT_HPP_
