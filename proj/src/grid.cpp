#include "fkmc/grid.hpp"

#include <algorithm>
#include <cmath>

#include "fkmc/common.hpp"

namespace fkmc {

namespace {
// Steps shorter than first_step * kFloorRatio are clamped; keeps nodes
// representable and strictly increasing near T.
constexpr double kFloorRatio = 1e-9;
}  // namespace

TimeGrid TimeGrid::uniform(double T, int steps) {
  if (!(T > 0.0)) throw config_error("time grid: horizon T must be positive");
  if (steps < 2) throw config_error("grid.steps >= 2 required");
  TimeGrid g;
  g.T_ = T;
  g.refinement_ = Refinement::none;
  g.finalize(std::vector<double>(static_cast<std::size_t>(steps), 1.0));
  return g;
}

TimeGrid TimeGrid::geometric(double T, int steps, double ratio) {
  if (!(T > 0.0)) throw config_error("time grid: horizon T must be positive");
  if (steps < 2) throw config_error("grid.steps >= 2 required");
  if (!(ratio > 0.0 && ratio <= 1.0)) throw config_error("grid.ratio must be in (0,1]");
  TimeGrid g;
  g.T_ = T;
  g.refinement_ = Refinement::geometric;
  g.ratio_ = ratio;
  const int m = steps;
  // Uniform body followed by a geometric tail; the tail length is capped by
  // the step floor so that extra steps are not wasted below resolution.
  int tail = m;
  if (ratio < 1.0) {
    tail = static_cast<int>(std::ceil(std::log(kFloorRatio) / std::log(ratio)));
    tail = std::min(tail, m);
  }
  std::vector<double> w(static_cast<std::size_t>(m), 1.0);
  for (int j = 0; j < tail; ++j) {
    const int k = m - tail + j;
    w[static_cast<std::size_t>(k)] = std::max(std::pow(ratio, j + 1), kFloorRatio);
  }
  g.finalize(w);
  return g;
}

void TimeGrid::finalize(const std::vector<double>& weights) {
  const int m = static_cast<int>(weights.size());
  double total = 0.0;
  for (double w : weights) total += w;
  steps_.resize(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) steps_[static_cast<std::size_t>(k)] = T_ * weights[static_cast<std::size_t>(k)] / total;
  // Build "time remaining" by suffix accumulation so the nodes near T keep
  // full relative precision, then place the nodes as T - remaining.
  remaining_.assign(static_cast<std::size_t>(m) + 1, 0.0);
  for (int k = m - 1; k >= 0; --k)
    remaining_[static_cast<std::size_t>(k)] =
        remaining_[static_cast<std::size_t>(k) + 1] + steps_[static_cast<std::size_t>(k)];
  nodes_.assign(static_cast<std::size_t>(m) + 1, 0.0);
  nodes_[0] = 0.0;
  nodes_[static_cast<std::size_t>(m)] = T_;
  remaining_[0] = T_;
  for (int k = 1; k < m; ++k)
    nodes_[static_cast<std::size_t>(k)] = T_ - remaining_[static_cast<std::size_t>(k)];
  for (int k = 0; k < m; ++k) {
    steps_[static_cast<std::size_t>(k)] =
        nodes_[static_cast<std::size_t>(k) + 1] - nodes_[static_cast<std::size_t>(k)];
    if (!(steps_[static_cast<std::size_t>(k)] > 0.0))
      throw numerical_error("time grid degenerate: non-increasing nodes");
  }
}

int TimeGrid::nearest_node(double t) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
  if (it == nodes_.begin()) return 0;
  if (it == nodes_.end()) return steps();
  const int hi = static_cast<int>(it - nodes_.begin());
  const int lo = hi - 1;
  return (t - nodes_[static_cast<std::size_t>(lo)] <= nodes_[static_cast<std::size_t>(hi)] - t) ? lo
                                                                                                : hi;
}

}  // namespace fkmc
