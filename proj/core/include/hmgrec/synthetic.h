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

#ifndef HMGREC_SYNTHETIC_H_
#define HMGREC_SYNTHETIC_H_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hmgrec/ingest.h"

namespace hmgrec {

// Planted interaction logs with two user archetypes over the default
// pv/fav/cart/buy vocabulary. Items are split into `groups` taste groups,
// alternating between two categories. Direct buyers pick a taste group from
// the first category and only buy. Viewers pick a group from the second
// category, browse items of it, view each item a few times before buying it
// and sometimes favourite or cart it first.
struct SyntheticSpec {
  size_t users = 200;
  size_t items = 100;
  double direct_buy = 0.5;  // archetype mix weights, normalised
  double view_then_buy = 0.5;
  uint64_t seed = 7;
  size_t groups = 10;
  int min_buys = 6;
  int max_buys = 9;
  double in_group = 0.8;  // probability a purchase comes from the user's group
  int min_browse = 2;     // extra viewed-only items for viewers
  int max_browse = 5;

  // Throws std::invalid_argument on impossible settings.
  void Validate() const;
};

// Parses "direct-buy=0.5,view-then-buy=0.5" into SyntheticSpec mix weights.
void ParseArchetypeMix(const std::string &text, SyntheticSpec &spec);

// Records in generation order; user keys are 1..users, item keys 1..items.
std::vector<InteractionRecord> GenerateSynthetic(const SyntheticSpec &spec);

// user,item,category,behavior,timestamp lines.
void WriteInteractionLog(std::span<const InteractionRecord> records, const BehaviorVocab &vocab,
                         std::ostream &out);

}  // namespace hmgrec

#endif  // HMGREC_SYNTHETIC_H_
