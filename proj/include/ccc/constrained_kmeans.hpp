#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccc/census.hpp"
#include "ccc/matrix.hpp"

namespace ccc {

struct ClusterSpec {
  Indicator indicator = Indicator::roof;
  std::vector<std::string> class_names;
  std::vector<long long> targets;  // pixels per class

  std::size_t k() const { return targets.size(); }
  long long target_total() const;
};

ClusterSpec make_cluster_spec(Indicator indicator, const ClassCounts& pixel_targets);

// Pixels whose Sum(targets) < |M| residual is absorbed by a zero-cost slack
// demand when the policy allows it; they keep their nearest center's class.
enum class SlackPolicy { forbid, absorb };

struct AssignmentState {
  std::vector<double> latents;
  std::vector<double> centers;
  std::vector<int> labels;          // class index per pixel
  std::vector<std::uint8_t> slack;  // 1 where the pixel went to the slack demand
  double objective = 0.0;           // sum of 0.5 (z - c)^2 over non-slack pixels
  int iterations = 0;
  std::vector<double> objective_history;

  // Binary |M| x k selection array: T(j, h) = 1 iff pixel j is in class h.
  Matrix selection_array() const;
  std::vector<long long> column_sums() const;
};

// Min-cost assignment of 1-D latents to centers with exact class sizes.
std::vector<int> assign_with_constraints(std::span<const double> latents, std::span<const double> centers,
                                         std::span<const long long> targets, SlackPolicy slack = SlackPolicy::forbid,
                                         std::vector<std::uint8_t>* slack_out = nullptr);

// Exhaustive search over every assignment with the given column sums; a test
// oracle for |M| <= 12.
std::vector<int> brute_force_assign(std::span<const double> latents, std::span<const double> centers,
                                    std::span<const long long> targets);

double assignment_objective(std::span<const double> latents, std::span<const double> centers,
                            std::span<const int> labels, std::span<const std::uint8_t> slack = {});

// Mean latent per class; empty classes keep their previous center.
std::vector<double> update_centers(std::span<const double> latents, std::span<const int> labels,
                                   std::span<const double> previous, std::span<const std::uint8_t> slack = {});

// Latent quantiles at the midpoint of each class's cumulative target block.
std::vector<double> initial_centers(std::span<const double> latents, std::span<const long long> targets);

struct FitOptions {
  double tolerance = 1e-6;
  int max_iterations = 100;
  SlackPolicy slack = SlackPolicy::absorb;
};

AssignmentState fit(std::span<const double> latents, const ClusterSpec& spec,
                    std::optional<std::vector<double>> initial = std::nullopt, const FitOptions& options = {});

// Allowed classes per pixel for one indicator; an empty set means the pixel
// has no groundtruth.
struct GroundtruthOverlay {
  std::vector<std::vector<int>> allowed;

  std::size_t size() const { return allowed.size(); }
  bool covered(std::size_t j) const { return !allowed[j].empty(); }
  bool allows(std::size_t j, int h) const;
  std::size_t covered_count() const;
  static GroundtruthOverlay uncovered(std::size_t n) { return {std::vector<std::vector<int>>(n)}; }
};

// w_h proportional to 1 / (covered pixels whose allowed set contains h),
// normalized to sum 1. Classes no covered pixel allows get weight 0; with no
// coverage at all the weights are uniform.
std::vector<double> label_weights(const GroundtruthOverlay& overlay, std::size_t k);

struct ClusteringLoss {
  double value = 0.0;
  std::vector<double> latent_gradient;  // d value / d z_j
  std::vector<int> targets;             // class each pixel is pulled toward
};

// Weighted sum of |z_j - c_target(j)|. Covered pixels target the nearest
// center among their allowed classes; uncovered pixels their assigned class.
ClusteringLoss clustering_loss(const AssignmentState& state, const GroundtruthOverlay& overlay,
                               std::span<const double> weights);

}  // namespace ccc
