/*
 * Copyright 2026 The TTE Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Binary decision tree with scalar leaves. Nodes live in a flat pool; index
// 0 is always the root. Routing sends x[var] <= cut to the left child.

#ifndef TTE_TREE_HPP_
#define TTE_TREE_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace tte {

class DecisionTree {
 public:
  static constexpr int kNone = -1;

  struct Node {
    int var = kNone;  // split column; kNone for leaves
    double cut = 0.0;
    double value = 0.0;  // leaf parameter
    int parent = kNone;
    int left = kNone;
    int right = kNone;
  };

  explicit DecisionTree(double root_value = 0.0);

  static constexpr int root() { return 0; }
  // Size of the node pool; every node id is below this.
  std::size_t capacity() const { return nodes_.size(); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  bool is_leaf(int id) const { return node(id).left == kNone; }
  int depth(int id) const;

  std::vector<int> leaves() const;
  // Internal nodes whose two children are both leaves.
  std::vector<int> singly_internal_nodes() const;
  std::size_t leaf_count() const;
  std::size_t internal_count() const { return leaf_count() - 1; }
  bool is_stump() const { return is_leaf(root()); }

  int find_leaf(std::span<const double> x) const;
  double evaluate(std::span<const double> x) const {
    return node(find_leaf(x)).value;
  }

  // Splits `leaf`; returns (left, right) child ids.
  std::pair<int, int> grow(int leaf, int var, double cut, double left_value,
                           double right_value);
  // Collapses a singly-internal node back into a leaf.
  void prune(int id, double value);
  void set_rule(int id, int var, double cut);
  void set_value(int leaf, double value);

  // Adds one count per internal node to counts[var].
  void count_split_vars(std::vector<std::size_t>& counts) const;

  // Same shape and split rules, leaf values ignored.
  bool same_structure(const DecisionTree& other) const;
  // Same shape, rules and leaf values.
  friend bool operator==(const DecisionTree& a, const DecisionTree& b);

 private:
  Node& mut(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  int allocate();
  bool equal_from(const DecisionTree& other, int a, int b,
                  bool compare_values) const;

  std::vector<Node> nodes_;
  std::vector<int> free_;
};

}  // namespace tte

#endif  // TTE_TREE_HPP_
