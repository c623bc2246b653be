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

#ifndef HMGREC_HYPER_META_GRAPH_H_
#define HMGREC_HYPER_META_GRAPH_H_

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hmgrec/autodiff.h"
#include "hmgrec/ingest.h"
#include "hmgrec/tensor.h"

namespace hmgrec {

inline constexpr size_t kDefaultMaxChain = 20;

// Behaviors admitted at one level of the cascade: the `level` weakest
// behaviors plus the target. Level 0 is the target alone; the last level is
// the whole vocabulary.
class BehaviorLevelSet {
 public:
  BehaviorLevelSet() = default;
  BehaviorLevelSet(int level, std::vector<int> behaviors);

  int level() const { return level_; }
  const std::vector<int> &behaviors() const { return behaviors_; }  // ascending ranks
  bool Contains(int behavior) const;
  bool operator==(const BehaviorLevelSet &) const = default;

 private:
  int level_ = 0;
  std::vector<int> behaviors_;
};

// Throws std::out_of_range unless 0 <= level < vocab.size().
BehaviorLevelSet LevelSet(const BehaviorVocab &vocab, int level);

enum class NodeKind : uint8_t { kUser, kBehavior, kItem };

struct GraphNode {
  NodeKind kind = NodeKind::kUser;
  uint32_t ref = 0;        // user id, behavior rank, or item id
  int64_t timestamp = -1;  // event time for behavior nodes
  bool operator==(const GraphNode &) const = default;
};

struct Edge {
  uint32_t src = 0;  // parent
  uint32_t dst = 0;  // child
  bool operator==(const Edge &) const = default;
};

struct PathEvent {
  int behavior = 0;
  int64_t timestamp = 0;
  bool operator==(const PathEvent &) const = default;
};

// User -> behavior chain -> item, for a single (user, item) pair.
struct HyperMetaPath {
  uint32_t item = 0;
  std::vector<PathEvent> chain;
  bool empty() const { return chain.empty(); }
};

// Keeps the records whose behavior is admitted, orders them chronologically
// (ties by input sequence) and retains the most recent max_chain events.
// `records` must all belong to one (user, item) pair.
HyperMetaPath BuildHyperMetaPath(uint32_t item, std::span<const Interaction> records,
                                 const BehaviorLevelSet &allowed, size_t max_chain);

// Rooted tree: node 0 is the user; each admitted item contributes one
// behavior chain ending in an item leaf. Items appear in ascending id order.
struct HyperMetaGraph {
  uint32_t user = 0;
  int level = 0;
  BehaviorLevelSet allowed;
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;

  std::vector<uint32_t> Items() const;
};

// Throws std::out_of_range for an unknown user.
HyperMetaGraph BuildHyperMetaGraph(const Dataset &dataset, uint32_t user, int level,
                                   size_t max_chain = kDefaultMaxChain);
// One graph per level, 0 .. vocab.size() - 1.
std::vector<HyperMetaGraph> BuildAllLevels(const Dataset &dataset, uint32_t user,
                                           size_t max_chain = kDefaultMaxChain);

// Returns an empty string when the graph is a well-formed rooted tree whose
// root-to-leaf paths are User -> Behavior+ -> Item with admitted behaviors and
// nondecreasing timestamps; otherwise a description of the first violation.
std::string CheckGraphInvariants(const HyperMetaGraph &graph);

// Rows of the feature tables consumed by encoders.
enum FeatureTable : size_t { kUserFeatures = 0, kBehaviorFeatures = 1, kItemFeatures = 2 };

struct EncoderInput {
  // D^-1/2 (A + I) D^-1/2 over the undirected tree.
  std::shared_ptr<const SparseMatrix> normalized_adjacency;
  // Symmetric 0/1 adjacency without self loops.
  std::shared_ptr<const SparseMatrix> adjacency;
  // Initial feature source for each node, in node order.
  std::vector<ad::RowRef> features;
  size_t num_nodes() const { return features.size(); }
};

EncoderInput ToEncoderInput(const HyperMetaGraph &graph);

// Debug export: {"user", "level", "allowed", "nodes": [...], "edges": [...]}.
std::string GraphToJson(const HyperMetaGraph &graph, const Dataset &dataset);

}  // namespace hmgrec

#endif  // HMGREC_HYPER_META_GRAPH_H_
