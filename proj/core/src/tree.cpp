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

#include "tte/tree.hpp"

#include "tte/errors.hpp"

namespace tte {

DecisionTree::DecisionTree(double root_value) {
  nodes_.push_back(Node{});
  nodes_[0].value = root_value;
}

int DecisionTree::depth(int id) const {
  int d = 0;
  while (node(id).parent != kNone) {
    id = node(id).parent;
    ++d;
  }
  return d;
}

std::vector<int> DecisionTree::leaves() const {
  std::vector<int> out;
  std::vector<int> stack{root()};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (is_leaf(id)) {
      out.push_back(id);
    } else {
      stack.push_back(node(id).right);
      stack.push_back(node(id).left);
    }
  }
  return out;
}

std::vector<int> DecisionTree::singly_internal_nodes() const {
  std::vector<int> out;
  std::vector<int> stack{root()};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (is_leaf(id)) continue;
    const Node& n = node(id);
    if (is_leaf(n.left) && is_leaf(n.right)) {
      out.push_back(id);
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return out;
}

std::size_t DecisionTree::leaf_count() const { return leaves().size(); }

int DecisionTree::find_leaf(std::span<const double> x) const {
  int id = root();
  while (!is_leaf(id)) {
    const Node& n = node(id);
    id = x[static_cast<std::size_t>(n.var)] <= n.cut ? n.left : n.right;
  }
  return id;
}

int DecisionTree::allocate() {
  if (!free_.empty()) {
    const int id = free_.back();
    free_.pop_back();
    mut(id) = Node{};
    return id;
  }
  nodes_.push_back(Node{});
  return static_cast<int>(nodes_.size() - 1);
}

std::pair<int, int> DecisionTree::grow(int leaf, int var, double cut,
                                       double left_value, double right_value) {
  if (!is_leaf(leaf)) throw InputError("grow target is not a leaf");
  if (var < 0) throw InputError("split variable must be non-negative");
  const int l = allocate();
  const int r = allocate();
  mut(l).parent = leaf;
  mut(l).value = left_value;
  mut(r).parent = leaf;
  mut(r).value = right_value;
  Node& n = mut(leaf);
  n.var = var;
  n.cut = cut;
  n.left = l;
  n.right = r;
  n.value = 0.0;
  return {l, r};
}

void DecisionTree::prune(int id, double value) {
  const Node n = node(id);
  if (n.left == kNone || !is_leaf(n.left) || !is_leaf(n.right)) {
    throw InputError("prune target is not singly internal");
  }
  free_.push_back(n.left);
  free_.push_back(n.right);
  mut(n.left) = Node{};
  mut(n.right) = Node{};
  Node& m = mut(id);
  m.var = kNone;
  m.cut = 0.0;
  m.left = kNone;
  m.right = kNone;
  m.value = value;
}

void DecisionTree::set_rule(int id, int var, double cut) {
  if (is_leaf(id)) throw InputError("cannot set a split rule on a leaf");
  mut(id).var = var;
  mut(id).cut = cut;
}

void DecisionTree::set_value(int leaf, double value) {
  if (!is_leaf(leaf)) throw InputError("leaf value set on an internal node");
  mut(leaf).value = value;
}

void DecisionTree::count_split_vars(std::vector<std::size_t>& counts) const {
  std::vector<int> stack{root()};
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (is_leaf(id)) continue;
    const Node& n = node(id);
    const auto v = static_cast<std::size_t>(n.var);
    if (v >= counts.size()) counts.resize(v + 1, 0);
    ++counts[v];
    stack.push_back(n.left);
    stack.push_back(n.right);
  }
}

bool DecisionTree::equal_from(const DecisionTree& other, int a, int b,
                              bool compare_values) const {
  const bool la = is_leaf(a);
  if (la != other.is_leaf(b)) return false;
  const Node& x = node(a);
  const Node& y = other.node(b);
  if (la) return !compare_values || x.value == y.value;
  return x.var == y.var && x.cut == y.cut &&
         equal_from(other, x.left, y.left, compare_values) &&
         equal_from(other, x.right, y.right, compare_values);
}

bool DecisionTree::same_structure(const DecisionTree& other) const {
  return equal_from(other, root(), other.root(), false);
}

bool operator==(const DecisionTree& a, const DecisionTree& b) {
  return a.equal_from(b, a.root(), b.root(), true);
}

}  // namespace tte
