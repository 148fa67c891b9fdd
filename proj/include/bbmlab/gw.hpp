#pragma once

/**
 * Exact event-driven simulation of the continuous-time Galton-Watson
 * genealogy: unit-rate exponential lifetimes, an offspring law with mean
 * two and no deaths. Nothing is time-discretized; every branch time is an
 * exponential sample, so n(t) has its exact law.
 *
 * Trees are flat arrays of node records in creation order (parents always
 * precede children, siblings are contiguous) and immutable after
 * construction, so they can be shared read-only across threads.
 */

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "bbmlab/rng.hpp"

namespace bbmlab::gw {

// Raised when a horizon would blow the node budget; the request is rejected
// outright because truncating the population would bias n(t).
class ResourceCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultNodeCap = 100'000'000;

class OffspringLaw {
 public:
  // probs[k-1] = P(k children) for k >= 1. Requires sum 1 and mean exactly 2.
  explicit OffspringLaw(std::vector<double> probs);

  static OffspringLaw binary();  // p_2 = 1

  // K = sum_k k(k-1) p_k, the pair-counting constant of the law.
  double second_factorial_moment() const noexcept { return second_factorial_moment_; }
  int max_children() const noexcept { return static_cast<int>(probs_.size()); }
  const std::vector<double>& probabilities() const noexcept { return probs_; }

  int sample(rng::Stream& stream) const noexcept;

 private:
  std::vector<double> probs_;
  double second_factorial_moment_ = 0.0;
};

struct Node {
  std::int32_t parent;       // -1 for the root
  std::int32_t first_child;  // -1 for leaves; children are contiguous
  std::int32_t n_children;
  double birth;
  double end;  // branch time, or the horizon for leaves
};

class GwTree {
 public:
  // Takes ownership of node records; validates the parent/child structure
  // and collects leaves (end == horizon) in id order.
  GwTree(double horizon, std::vector<Node> nodes);

  double horizon() const noexcept { return horizon_; }
  std::size_t n_nodes() const noexcept { return nodes_.size(); }
  const Node& node(std::size_t id) const noexcept { return nodes_[id]; }
  std::span<const Node> nodes() const noexcept { return nodes_; }

  std::size_t n_leaves() const noexcept { return leaves_.size(); }
  std::span<const std::int32_t> leaves() const noexcept { return leaves_; }
  std::int32_t leaf_id(std::size_t leaf_index) const;

  // d(i_k, i_l): the time the two leaf lineages separate; overlap(k,k) = t.
  double overlap(std::size_t leaf_k, std::size_t leaf_l) const;

  // Number of particles alive at time s (a particle occupies (birth, end],
  // the root additionally covers s = 0).
  std::size_t n_alive(double s) const noexcept;

  // Branch events and total lived time, for the rate-1 estimator.
  std::size_t n_branch_events() const noexcept;
  double total_lifetime() const noexcept;

  // One node per line: `id parent_id birth_time n_children`.
  void dump(std::ostream& os) const;

 private:
  double horizon_;
  std::vector<Node> nodes_;
  std::vector<std::int32_t> leaves_;
};

GwTree sample_tree(double horizon, const OffspringLaw& law, rng::Stream& stream,
                   std::size_t node_cap = kDefaultNodeCap);

}  // namespace bbmlab::gw
