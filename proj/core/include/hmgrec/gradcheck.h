// Copyright 2026 The hmgrec Authors.
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

#ifndef HMGREC_GRADCHECK_H_
#define HMGREC_GRADCHECK_H_

#include <vector>

#include "hmgrec/ingest.h"
#include "hmgrec/parameters.h"
#include "hmgrec/recommender.h"

namespace hmgrec {

// Two users and three items touching every behavior of the default vocabulary.
Dataset GradCheckDataset();

// Finite-difference check of the joint objective on GradCheckDataset() for
// every parameter tensor of a model built from `config` (hidden is forced to
// 4). Negative sampling is reseeded on every evaluation so the objective is a
// deterministic function of the parameters. Tensors that start at zero
// (biases) get a small seeded jitter first: with zero biases a dead ReLU row
// feeds an exact zero into the next layer, which sits on the kink where the
// central difference and the subgradient disagree.
std::vector<GradCheckResult> GradCheckJointObjective(TrainConfig config, double tolerance,
                                                     double eps = 1e-5);

}  // namespace hmgrec

#endif  // HMGREC_GRADCHECK_H_
