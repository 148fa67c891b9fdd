#include "bbmlab/bbm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace bbmlab::bbm {

BbmForest::BbmForest(std::shared_ptr<const gw::GwTree> tree, double rho,
                     rng::Stream& x_stream, rng::Stream& z_stream,
                     std::span<const double> section_times) {
  if (!tree) throw std::invalid_argument("forest: null tree");
  if (!(rho >= -1.0 && rho <= 1.0))
    throw std::invalid_argument("forest: rho must lie in [-1, 1]");
  tree_ = std::move(tree);
  rho_ = rho;
  root_comp_ = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  const double horizon = tree_->horizon();
  std::vector<double> times(section_times.begin(), section_times.end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  for (double s : times) {
    if (!(s >= 0.0 && s <= horizon))
      throw std::invalid_argument("forest: section time outside [0, horizon]");
    sections_.push_back(Section{s, {}, {}, {}});
    // Time 0 is the root at the origin; the edge loop below only records
    // interior and right-endpoint times.
    if (s == 0.0 && horizon > 0.0) {
      sections_.back().node.push_back(0);
      sections_.back().x.push_back(0.0);
      sections_.back().z.push_back(0.0);
    }
  }

  const std::size_t n = tree_->n_nodes();
  x_end_.resize(n);
  z_end_.resize(n);
  for (std::size_t id = 0; id < n; ++id) {
    const gw::Node& nd = tree_->node(id);
    double x = id == 0 ? 0.0 : x_end_[nd.parent];
    double z = id == 0 ? 0.0 : z_end_[nd.parent];
    double t0 = nd.birth;
    for (Section& sec : sections_) {
      if (!(sec.time > nd.birth && sec.time < nd.end)) continue;
      const double sd = std::sqrt(sec.time - t0);
      x += sd * x_stream.normal();
      z += sd * z_stream.normal();
      sec.node.push_back(static_cast<std::int32_t>(id));
      sec.x.push_back(x);
      sec.z.push_back(z);
      t0 = sec.time;
    }
    if (nd.end > t0) {
      const double sd = std::sqrt(nd.end - t0);
      x += sd * x_stream.normal();
      z += sd * z_stream.normal();
    }
    x_end_[id] = x;
    z_end_[id] = z;
    // A particle occupies (birth, end]; a section landing exactly on the
    // edge's right end records the endpoint value (this is how the horizon
    // and the root at time 0 are picked up).
    for (Section& sec : sections_) {
      const bool born = nd.birth < sec.time || (id == 0 && sec.time >= 0.0);
      if (born && sec.time == nd.end) {
        sec.node.push_back(static_cast<std::int32_t>(id));
        sec.x.push_back(x);
        sec.z.push_back(z);
      }
    }
  }
}

BbmForest BbmForest::from_positions(std::shared_ptr<const gw::GwTree> tree, double rho,
                                    std::vector<double> x_end,
                                    std::vector<double> z_end) {
  if (!tree) throw std::invalid_argument("forest: null tree");
  if (x_end.size() != tree->n_nodes() || z_end.size() != tree->n_nodes())
    throw std::invalid_argument("forest: position arrays must match the node count");
  BbmForest forest;
  forest.tree_ = std::move(tree);
  forest.rho_ = rho;
  forest.root_comp_ = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  forest.x_end_ = std::move(x_end);
  forest.z_end_ = std::move(z_end);
  return forest;
}

const Section* BbmForest::find_section(double time) const noexcept {
  for (const Section& sec : sections_)
    if (sec.time == time) return &sec;
  return nullptr;
}

const Section& BbmForest::section_at(double time) const {
  const Section* sec = find_section(time);
  if (!sec) throw std::invalid_argument("forest: no section recorded at requested time");
  return *sec;
}

PathRecord BbmForest::leaf_path(std::size_t leaf_index) const {
  std::vector<std::int32_t> chain;
  for (std::int32_t id = tree_->leaf_id(leaf_index); id != -1;
       id = tree_->node(id).parent)
    chain.push_back(id);
  std::reverse(chain.begin(), chain.end());

  PathRecord rec;
  rec.time.push_back(0.0);
  rec.x.push_back(0.0);
  for (std::int32_t id : chain) {
    const gw::Node& nd = tree_->node(id);
    for (const Section& sec : sections_) {
      if (!(sec.time > nd.birth && sec.time < nd.end)) continue;
      const auto it = std::lower_bound(sec.node.begin(), sec.node.end(), id);
      const std::size_t pos = static_cast<std::size_t>(it - sec.node.begin());
      rec.time.push_back(sec.time);
      rec.x.push_back(sec.x[pos]);
    }
    if (nd.end > rec.time.back()) {
      rec.time.push_back(nd.end);
      rec.x.push_back(x_end_[id]);
    }
  }
  return rec;
}

void BbmForest::dump_leaves(std::ostream& os) const {
  char line[160];
  for (std::size_t k = 0; k < n_leaves(); ++k) {
    const std::int32_t id = tree_->leaf_id(k);
    std::snprintf(line, sizeof(line), "%d %.17g %.17g\n", id, x_end_[id],
                  y_from(x_end_[id], z_end_[id]));
    os << line;
  }
}

BarrierFlags path_barrier_event(const PathRecord& path, double sigma, double gamma,
                                double r, double t, double a_offset,
                                rng::Stream& stream) {
  if (!(gamma > 0.5 && gamma < 1.0))
    throw std::invalid_argument("invalid barrier exponent");
  if (!(r >= 0.0 && r <= t)) throw std::invalid_argument("barrier: need 0 <= r <= t");
  if (path.time.size() < 1 || path.time.size() != path.x.size())
    throw std::invalid_argument("barrier: malformed path record");
  if (path.time.back() != t)
    throw std::invalid_argument("barrier: path record must end at t");

  const auto barrier = [&](double s) { return 2.0 * sigma * s + std::pow(s, gamma); };

  BarrierFlags flags;
  flags.endpoint_ok = path.x.back() < 2.0 * sigma * t + a_offset * std::sqrt(t);

  flags.path_ok = true;
  if (r == t) {
    flags.path_ok = path.x.back() <= barrier(t);
    return flags;
  }
  for (std::size_t i = 0; i + 1 < path.time.size(); ++i) {
    const double s1 = path.time[i], s2 = path.time[i + 1];
    if (s2 <= r) continue;
    const double c1 = std::max(s1, r);
    const double b1 = barrier(c1), b2 = barrier(s2);
    // Chord of the barrier over [c1, s2], extended back to s1 when the
    // segment starts before r.
    const double slope = (b2 - b1) / (s2 - c1);
    const double l1 = b1 - slope * (c1 - s1);
    const double x1 = path.x[i], x2 = path.x[i + 1];
    if (x1 >= l1 || x2 >= b2) {
      flags.path_ok = false;
      break;
    }
    const double cross_prob = std::exp(-2.0 * (l1 - x1) * (b2 - x2) / (s2 - s1));
    if (stream.uniform01() < cross_prob) {
      flags.path_ok = false;
      break;
    }
  }
  return flags;
}

}  // namespace bbmlab::bbm
