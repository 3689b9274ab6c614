#pragma once

#include <vector>

namespace fkmc {

// Time discretisation of [0, T]. The geometric variant keeps a uniform body
// and lets the step size decay by `ratio` towards T, where the bridge drift
// stiffens; steps are floored so nodes stay strictly increasing in double
// precision.
class TimeGrid {
 public:
  enum class Refinement { none, geometric };

  static TimeGrid uniform(double T, int steps);
  static TimeGrid geometric(double T, int steps, double ratio);

  double horizon() const { return T_; }
  int steps() const { return static_cast<int>(nodes_.size()) - 1; }
  double node(int k) const { return nodes_[static_cast<std::size_t>(k)]; }
  double dt(int k) const { return steps_[static_cast<std::size_t>(k)]; }
  double remaining(int k) const { return remaining_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& nodes() const { return nodes_; }
  Refinement refinement() const { return refinement_; }
  double ratio() const { return ratio_; }

  // Node index whose time is nearest to t.
  int nearest_node(double t) const;

 private:
  TimeGrid() = default;
  void finalize(const std::vector<double>& weights);

  double T_ = 0.0;
  Refinement refinement_ = Refinement::none;
  double ratio_ = 1.0;
  std::vector<double> nodes_;      // size m+1, nodes[0] = 0, nodes[m] = T
  std::vector<double> steps_;      // size m
  std::vector<double> remaining_;  // T - nodes[k], built by suffix sums
};

}  // namespace fkmc
