#include "bbmlab/gw.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace bbmlab::gw {

namespace {
constexpr double kLawTol = 1e-12;
}

OffspringLaw::OffspringLaw(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw std::invalid_argument("offspring law: empty");
  double sum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::invalid_argument("offspring law: probabilities must be >= 0");
    const double k = static_cast<double>(i + 1);
    sum += p;
    mean += k * p;
    second_factorial_moment_ += k * (k - 1.0) * p;
  }
  if (std::abs(sum - 1.0) > kLawTol)
    throw std::invalid_argument("offspring law: probabilities must sum to 1");
  if (std::abs(mean - 2.0) > kLawTol)
    throw std::invalid_argument("offspring law: mean number of children must be 2");
}

OffspringLaw OffspringLaw::binary() { return OffspringLaw({0.0, 1.0}); }

int OffspringLaw::sample(rng::Stream& stream) const noexcept {
  const double u = stream.uniform01();
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < probs_.size(); ++i) {
    cum += probs_[i];
    if (u < cum) return static_cast<int>(i + 1);
  }
  return static_cast<int>(probs_.size());
}

GwTree::GwTree(double horizon, std::vector<Node> nodes)
    : horizon_(horizon), nodes_(std::move(nodes)) {
  if (!(horizon_ >= 0.0)) throw std::invalid_argument("tree: horizon must be >= 0");
  if (nodes_.empty()) throw std::invalid_argument("tree: no nodes");
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& nd = nodes_[id];
    if (id == 0) {
      if (nd.parent != -1 || nd.birth != 0.0)
        throw std::invalid_argument("tree: root must have parent -1 and birth 0");
    } else {
      if (nd.parent < 0 || static_cast<std::size_t>(nd.parent) >= id)
        throw std::invalid_argument("tree: parents must precede children");
      if (nd.birth != nodes_[nd.parent].end)
        throw std::invalid_argument("tree: child birth must equal parent branch time");
    }
    if (nd.end < nd.birth || nd.end > horizon_)
      throw std::invalid_argument("tree: node interval outside [birth, horizon]");
    if (nd.n_children > 0) {
      if (nd.end >= horizon_ || nd.end <= nd.birth)
        throw std::invalid_argument("tree: branch time must lie strictly inside the edge");
      if (nd.first_child < 0 ||
          static_cast<std::size_t>(nd.first_child) + nd.n_children > nodes_.size())
        throw std::invalid_argument("tree: child range out of bounds");
    } else if (nd.end == horizon_) {
      leaves_.push_back(static_cast<std::int32_t>(id));
    } else {
      throw std::invalid_argument("tree: childless node that does not reach the horizon");
    }
  }
  if (leaves_.empty()) throw std::invalid_argument("tree: no leaves");
}

std::int32_t GwTree::leaf_id(std::size_t leaf_index) const {
  if (leaf_index >= leaves_.size()) throw std::out_of_range("leaf out of range");
  return leaves_[leaf_index];
}

double GwTree::overlap(std::size_t leaf_k, std::size_t leaf_l) const {
  if (leaf_k >= leaves_.size() || leaf_l >= leaves_.size())
    throw std::out_of_range("leaf out of range");
  if (leaf_k == leaf_l) return horizon_;
  std::int32_t a = leaves_[leaf_k];
  std::int32_t b = leaves_[leaf_l];
  // Ascend the later-born lineage until the paths meet; births strictly
  // decrease along parents, so this terminates at the common ancestor.
  while (a != b) {
    if (nodes_[a].birth > nodes_[b].birth) {
      a = nodes_[a].parent;
    } else if (nodes_[b].birth > nodes_[a].birth) {
      b = nodes_[b].parent;
    } else {
      a = nodes_[a].parent;
      b = nodes_[b].parent;
    }
  }
  return nodes_[a].end;
}

std::size_t GwTree::n_alive(double s) const noexcept {
  std::size_t count = 0;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& nd = nodes_[id];
    const bool born = nd.birth < s || (id == 0 && s >= 0.0);
    if (born && s <= nd.end) ++count;
  }
  return count;
}

std::size_t GwTree::n_branch_events() const noexcept {
  std::size_t count = 0;
  for (const Node& nd : nodes_)
    if (nd.n_children > 0) ++count;
  return count;
}

double GwTree::total_lifetime() const noexcept {
  double sum = 0.0;
  for (const Node& nd : nodes_) sum += nd.end - nd.birth;
  return sum;
}

void GwTree::dump(std::ostream& os) const {
  char line[128];
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& nd = nodes_[id];
    std::snprintf(line, sizeof(line), "%zu %d %.15g %d\n", id, nd.parent, nd.birth,
                  nd.n_children);
    os << line;
  }
}

GwTree sample_tree(double horizon, const OffspringLaw& law, rng::Stream& stream,
                   std::size_t node_cap) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw std::invalid_argument("sample_tree: horizon must be finite and >= 0");
  // A mean-two law grows to ~e^t leaves and ~2 e^t nodes; reject projected
  // blow-ups up front instead of truncating.
  if (2.0 * std::exp(horizon) > static_cast<double>(node_cap))
    throw ResourceCapError("horizon too large: projected node count exceeds the cap");

  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(std::min(
      static_cast<double>(node_cap), 2.5 * std::exp(horizon) + 16.0)));
  nodes.push_back(Node{-1, -1, 0, 0.0, 0.0});

  std::vector<std::int32_t> work;
  work.push_back(0);
  while (!work.empty()) {
    const std::int32_t id = work.back();
    work.pop_back();
    const double death = nodes[id].birth + stream.exponential();
    if (death >= horizon) {
      nodes[id].end = horizon;
      continue;
    }
    nodes[id].end = death;
    const int k = law.sample(stream);
    if (nodes.size() + static_cast<std::size_t>(k) > node_cap)
      throw ResourceCapError("horizon too large: node cap exceeded while sampling");
    nodes[id].first_child = static_cast<std::int32_t>(nodes.size());
    nodes[id].n_children = k;
    for (int c = 0; c < k; ++c) {
      work.push_back(static_cast<std::int32_t>(nodes.size()));
      nodes.push_back(Node{id, -1, 0, death, death});
    }
  }
  return GwTree(horizon, std::move(nodes));
}

}  // namespace bbmlab::gw
