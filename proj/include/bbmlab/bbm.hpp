#pragma once

/**
 * The coupled BBM pair (X, Y) on a given Galton-Watson tree.
 *
 * Increments are sampled per edge (variance = edge duration) and positions
 * are path sums, so memory stays O(nodes). The pair is realised through the
 * decomposition Y = rho * X + sqrt(1 - rho^2) * Z with Z an independent
 * motion on the same tree; y-values are derived, never stored.
 *
 * Section times requested at construction split every edge they cross, so
 * positions at those times are exact Gaussian refinements rather than
 * bridge interpolations, and every particle alive at a section time is
 * recorded there. Forests are immutable after sampling.
 */

#include <complex>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "bbmlab/gw.hpp"
#include "bbmlab/rng.hpp"

namespace bbmlab::bbm {

// Particles alive at one recorded time, in node-id order.
struct Section {
  double time = 0.0;
  std::vector<std::int32_t> node;
  std::vector<double> x;
  std::vector<double> z;
};

// One leaf's driving-motion history: (time, x) at every ancestral branch
// point, every section time the path crosses, and the horizon. Times are
// strictly increasing and start at (0, 0).
struct PathRecord {
  std::vector<double> time;
  std::vector<double> x;
};

struct BarrierFlags {
  bool endpoint_ok = false;  // x(t) < 2 sigma t + A sqrt(t)
  bool path_ok = false;      // for all s in [r, t]: x(s) <= 2 sigma s + s^gamma
};

class BbmForest {
 public:
  BbmForest(std::shared_ptr<const gw::GwTree> tree, double rho,
            rng::Stream& x_stream, rng::Stream& z_stream,
            std::span<const double> section_times = {});

  // Positions supplied directly; used by tests to build exact configurations.
  static BbmForest from_positions(std::shared_ptr<const gw::GwTree> tree, double rho,
                                  std::vector<double> x_end, std::vector<double> z_end);

  const gw::GwTree& tree() const noexcept { return *tree_; }
  std::shared_ptr<const gw::GwTree> tree_ptr() const noexcept { return tree_; }
  double rho() const noexcept { return rho_; }

  double node_x(std::size_t id) const noexcept { return x_end_[id]; }
  double node_z(std::size_t id) const noexcept { return z_end_[id]; }
  double y_from(double x, double z) const noexcept { return rho_ * x + root_comp_ * z; }

  std::size_t n_leaves() const noexcept { return tree_->n_leaves(); }
  double leaf_x(std::size_t leaf_index) const { return x_end_[tree_->leaf_id(leaf_index)]; }
  double leaf_z(std::size_t leaf_index) const { return z_end_[tree_->leaf_id(leaf_index)]; }
  double leaf_y(std::size_t leaf_index) const {
    const auto id = tree_->leaf_id(leaf_index);
    return y_from(x_end_[id], z_end_[id]);
  }

  std::span<const Section> sections() const noexcept { return sections_; }
  const Section* find_section(double time) const noexcept;
  const Section& section_at(double time) const;  // throws if not recorded

  PathRecord leaf_path(std::size_t leaf_index) const;

  // One leaf per line: `leaf_id x y` (node ids, 17 significant digits).
  void dump_leaves(std::ostream& os) const;

 private:
  BbmForest() = default;

  std::shared_ptr<const gw::GwTree> tree_;
  double rho_ = 0.0;
  double root_comp_ = 1.0;  // sqrt(1 - rho^2)
  std::vector<double> x_end_;
  std::vector<double> z_end_;
  std::vector<Section> sections_;
};

/**
 * Barrier flags for one leaf path against the line 2*sigma*t + A*sqrt(t)
 * (endpoint, exact) and the curve 2*sigma*s + s^gamma on [r, t] (path).
 *
 * Between recorded points the path event is decided by the exact crossing
 * probability of the Brownian bridge against the chord of the barrier over
 * the constrained part of the segment, sampled as a Bernoulli mark from
 * `stream`. The curve is concave, so the chord sits below it and the check
 * is conservative: it may reject paths a finer check would accept.
 */
BarrierFlags path_barrier_event(const PathRecord& path, double sigma, double gamma,
                                double r, double t, double a_offset,
                                rng::Stream& stream);

}  // namespace bbmlab::bbm
