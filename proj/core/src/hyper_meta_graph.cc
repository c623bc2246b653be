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

#include "hmgrec/hyper_meta_graph.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

namespace hmgrec {

BehaviorLevelSet::BehaviorLevelSet(int level, std::vector<int> behaviors)
    : level_(level), behaviors_(std::move(behaviors)) {
  std::sort(behaviors_.begin(), behaviors_.end());
  behaviors_.erase(std::unique(behaviors_.begin(), behaviors_.end()), behaviors_.end());
}

bool BehaviorLevelSet::Contains(int behavior) const {
  return std::binary_search(behaviors_.begin(), behaviors_.end(), behavior);
}

BehaviorLevelSet LevelSet(const BehaviorVocab &vocab, int level) {
  if (level < 0 || static_cast<size_t>(level) >= vocab.size())
    throw std::out_of_range("behavior level " + std::to_string(level) + " outside [0, " +
                            std::to_string(vocab.size() - 1) + "]");
  std::vector<int> behaviors;
  for (int r = 0; r < level; ++r) behaviors.push_back(r);
  behaviors.push_back(vocab.target());
  return BehaviorLevelSet(level, std::move(behaviors));
}

HyperMetaPath BuildHyperMetaPath(uint32_t item, std::span<const Interaction> records,
                                 const BehaviorLevelSet &allowed, size_t max_chain) {
  if (max_chain == 0) throw std::invalid_argument("max_chain must be at least 1");
  std::vector<const Interaction *> kept;
  for (const Interaction &r : records) {
    if (r.item != item) throw std::invalid_argument("hyper meta-path records span several items");
    if (allowed.Contains(r.behavior)) kept.push_back(&r);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const Interaction *a, const Interaction *b) {
    return a->timestamp != b->timestamp ? a->timestamp < b->timestamp : a->sequence < b->sequence;
  });
  HyperMetaPath path;
  path.item = item;
  const size_t first = kept.size() > max_chain ? kept.size() - max_chain : 0;
  for (size_t i = first; i < kept.size(); ++i)
    path.chain.push_back({kept[i]->behavior, kept[i]->timestamp});
  return path;
}

std::vector<uint32_t> HyperMetaGraph::Items() const {
  std::vector<uint32_t> items;
  for (const GraphNode &n : nodes)
    if (n.kind == NodeKind::kItem) items.push_back(n.ref);
  return items;
}

HyperMetaGraph BuildHyperMetaGraph(const Dataset &dataset, uint32_t user, int level,
                                   size_t max_chain) {
  if (user >= dataset.num_users())
    throw std::out_of_range("unknown user id " + std::to_string(user));
  HyperMetaGraph graph;
  graph.user = user;
  graph.level = level;
  graph.allowed = LevelSet(dataset.vocab(), level);
  graph.nodes.push_back({NodeKind::kUser, user, -1});

  std::map<uint32_t, std::vector<Interaction>> by_item;
  for (const Interaction &r : dataset.UserRecords(user)) by_item[r.item].push_back(r);

  for (const auto &[item, records] : by_item) {
    const HyperMetaPath path = BuildHyperMetaPath(item, records, graph.allowed, max_chain);
    if (path.empty()) continue;
    uint32_t parent = 0;
    for (const PathEvent &e : path.chain) {
      const auto id = static_cast<uint32_t>(graph.nodes.size());
      graph.nodes.push_back({NodeKind::kBehavior, static_cast<uint32_t>(e.behavior), e.timestamp});
      graph.edges.push_back({parent, id});
      parent = id;
    }
    const auto leaf = static_cast<uint32_t>(graph.nodes.size());
    graph.nodes.push_back({NodeKind::kItem, item, -1});
    graph.edges.push_back({parent, leaf});
  }
  return graph;
}

std::vector<HyperMetaGraph> BuildAllLevels(const Dataset &dataset, uint32_t user,
                                           size_t max_chain) {
  std::vector<HyperMetaGraph> graphs;
  for (size_t t = 0; t < dataset.vocab().size(); ++t)
    graphs.push_back(BuildHyperMetaGraph(dataset, user, static_cast<int>(t), max_chain));
  return graphs;
}

std::string CheckGraphInvariants(const HyperMetaGraph &graph) {
  const size_t n = graph.nodes.size();
  if (n == 0) return "graph has no nodes";
  if (graph.nodes[0].kind != NodeKind::kUser) return "node 0 is not the user";
  if (graph.edges.size() != n - 1) return "edge count is not node count - 1";
  std::vector<int> parent(n, -1);
  std::vector<std::vector<uint32_t>> children(n);
  for (const Edge &e : graph.edges) {
    if (e.src >= n || e.dst >= n) return "edge endpoint out of range";
    if (e.dst == 0) return "root has a parent";
    if (parent[e.dst] != -1) return "node with two parents";
    parent[e.dst] = static_cast<int>(e.src);
    children[e.src].push_back(e.dst);
  }
  for (size_t i = 1; i < n; ++i) {
    if (graph.nodes[i].kind == NodeKind::kUser) return "second user node";
    if (parent[i] == -1) return "orphan node";
  }
  // Walk from the root; verifies connectivity and the path grammar.
  std::vector<bool> seen(n, false);
  std::vector<uint32_t> stack{0};
  seen[0] = true;
  size_t visited = 0;
  while (!stack.empty()) {
    const uint32_t v = stack.back();
    stack.pop_back();
    ++visited;
    const GraphNode &node = graph.nodes[v];
    if (node.kind == NodeKind::kItem && !children[v].empty()) return "item node is not a leaf";
    if (node.kind != NodeKind::kItem && children[v].empty() && v != 0)
      return "behavior chain does not end in an item";
    if (node.kind == NodeKind::kBehavior) {
      if (!graph.allowed.Contains(static_cast<int>(node.ref))) return "behavior outside level set";
      const GraphNode &up = graph.nodes[parent[v]];
      if (up.kind == NodeKind::kItem) return "behavior below an item";
      if (up.kind == NodeKind::kBehavior) {
        if (up.timestamp > node.timestamp) return "chain is not chronological";
        if (children[parent[v]].size() != 1) return "behavior chain branches";
      }
    }
    if (node.kind == NodeKind::kItem && graph.nodes[parent[v]].kind != NodeKind::kBehavior)
      return "item attached directly to the user";
    for (uint32_t c : children[v]) {
      if (seen[c]) return "cycle";
      seen[c] = true;
      stack.push_back(c);
    }
  }
  if (visited != n) return "graph is disconnected";
  auto items = graph.Items();
  std::sort(items.begin(), items.end());
  if (std::adjacent_find(items.begin(), items.end()) != items.end()) return "duplicate item leaf";
  return {};
}

EncoderInput ToEncoderInput(const HyperMetaGraph &graph) {
  const size_t n = graph.nodes.size();
  std::vector<double> degree(n, 1.0);  // self loop
  for (const Edge &e : graph.edges) {
    degree[e.src] += 1.0;
    degree[e.dst] += 1.0;
  }
  std::vector<SparseMatrix::Entry> normalized, raw;
  for (size_t i = 0; i < n; ++i) normalized.push_back({i, i, 1.0 / degree[i]});
  for (const Edge &e : graph.edges) {
    const double w = 1.0 / std::sqrt(degree[e.src] * degree[e.dst]);
    normalized.push_back({e.src, e.dst, w});
    normalized.push_back({e.dst, e.src, w});
    raw.push_back({e.src, e.dst, 1.0});
    raw.push_back({e.dst, e.src, 1.0});
  }
  EncoderInput input;
  input.normalized_adjacency = std::make_shared<SparseMatrix>(n, n, std::move(normalized));
  input.adjacency = std::make_shared<SparseMatrix>(n, n, std::move(raw));
  input.features.reserve(n);
  for (const GraphNode &node : graph.nodes) {
    switch (node.kind) {
      case NodeKind::kUser:
        input.features.push_back({kUserFeatures, node.ref});
        break;
      case NodeKind::kBehavior:
        input.features.push_back({kBehaviorFeatures, node.ref});
        break;
      case NodeKind::kItem:
        input.features.push_back({kItemFeatures, node.ref});
        break;
    }
  }
  return input;
}

std::string GraphToJson(const HyperMetaGraph &graph, const Dataset &dataset) {
  nlohmann::ordered_json doc;
  doc["user"] = dataset.users().key(graph.user);
  doc["level"] = graph.level;
  std::vector<std::string> allowed;
  for (int b : graph.allowed.behaviors()) allowed.push_back(dataset.vocab().name(b));
  doc["allowed"] = allowed;
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    const GraphNode &node = graph.nodes[i];
    nlohmann::ordered_json j;
    j["id"] = i;
    switch (node.kind) {
      case NodeKind::kUser:
        j["kind"] = "user";
        j["key"] = dataset.users().key(node.ref);
        break;
      case NodeKind::kBehavior:
        j["kind"] = "behavior";
        j["behavior"] = dataset.vocab().name(static_cast<int>(node.ref));
        j["timestamp"] = node.timestamp;
        break;
      case NodeKind::kItem:
        j["kind"] = "item";
        j["key"] = dataset.items().key(node.ref);
        break;
    }
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const Edge &e : graph.edges) edges.push_back({e.src, e.dst});
  doc["edges"] = std::move(edges);
  return doc.dump(2);
}

}  // namespace hmgrec
