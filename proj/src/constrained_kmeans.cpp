#include "ccc/constrained_kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "ccc/csv.hpp"
#include "ccc/error.hpp"
#include "ccc/kernels.hpp"
#include "ccc/min_cost_flow.hpp"

namespace ccc {

namespace {

constexpr double kCostResolution = 1e9;
constexpr double kMaxScaledCost = 4e15;
constexpr std::size_t kBruteForceLimit = 12;

double half_sq(double z, double c) { return 0.5 * (z - c) * (z - c); }

}  // namespace

long long ClusterSpec::target_total() const { return std::accumulate(targets.begin(), targets.end(), 0LL); }

ClusterSpec make_cluster_spec(Indicator indicator, const ClassCounts& pixel_targets) {
  ClusterSpec spec;
  spec.indicator = indicator;
  for (const auto& [name, n] : pixel_targets) {
    if (n < 0) throw ValidationError("negative pixel target for class '" + name + "'");
    spec.class_names.push_back(name);
    spec.targets.push_back(n);
  }
  return spec;
}

Matrix AssignmentState::selection_array() const {
  Matrix t(labels.size(), centers.size());
  for (std::size_t j = 0; j < labels.size(); ++j) t(j, static_cast<std::size_t>(labels[j])) = 1.0;
  return t;
}

std::vector<long long> AssignmentState::column_sums() const {
  std::vector<long long> s(centers.size(), 0);
  for (int l : labels) ++s[static_cast<std::size_t>(l)];
  return s;
}

std::vector<int> assign_with_constraints(std::span<const double> latents, std::span<const double> centers,
                                         std::span<const long long> targets, SlackPolicy slack,
                                         std::vector<std::uint8_t>* slack_out) {
  const std::size_t m = latents.size(), k = centers.size();
  if (targets.size() != k) throw std::invalid_argument("assign_with_constraints: targets and centers differ in length");
  long long total = 0;
  for (long long t : targets) {
    if (t < 0) throw ValidationError("assign_with_constraints: negative target");
    total += t;
  }
  const auto mm = static_cast<long long>(m);
  if (total > mm || (total < mm && slack == SlackPolicy::forbid))
    throw InfeasibleError("class targets sum to " + std::to_string(total) + " but the sector has " +
                          std::to_string(mm) + " pixels");
  const bool with_slack = total < mm;
  const std::size_t width = k + (with_slack ? 1 : 0);

  const Matrix real_costs = kernels::half_sq_costs(latents, centers);
  std::vector<flow::Cost> costs(m * width, 0);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t h = 0; h < k; ++h) {
      const double scaled = real_costs(j, h) * kCostResolution;
      if (!(scaled <= kMaxScaledCost))
        throw NumericalError("assignment cost overflow: latent " + csv::format_double(latents[j]) + " vs center " +
                             csv::format_double(centers[h]));
      costs[j * width + h] = std::llround(scaled);
    }
  std::vector<std::int64_t> caps(targets.begin(), targets.end());
  if (with_slack) caps.push_back(mm - total);

  auto labels = flow::solve_transportation(costs, m, caps);
  if (slack_out) slack_out->assign(m, 0);
  if (with_slack) {
    for (std::size_t j = 0; j < m; ++j) {
      if (labels[j] != static_cast<int>(k)) continue;
      if (slack_out) (*slack_out)[j] = 1;
      std::size_t best = 0;
      for (std::size_t h = 1; h < k; ++h)
        if (real_costs(j, h) < real_costs(j, best)) best = h;
      labels[j] = static_cast<int>(best);
    }
  }
  return labels;
}

std::vector<int> brute_force_assign(std::span<const double> latents, std::span<const double> centers,
                                    std::span<const long long> targets) {
  const std::size_t m = latents.size(), k = centers.size();
  if (m > kBruteForceLimit)
    throw std::invalid_argument("brute_force_assign: " + std::to_string(m) + " pixels exceeds the limit of " +
                                std::to_string(kBruteForceLimit));
  if (targets.size() != k) throw std::invalid_argument("brute_force_assign: targets and centers differ in length");
  if (std::accumulate(targets.begin(), targets.end(), 0LL) != static_cast<long long>(m))
    throw InfeasibleError("brute_force_assign: targets do not sum to the pixel count");

  std::vector<long long> left(targets.begin(), targets.end());
  std::vector<int> current(m), best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, double)> go = [&](std::size_t j, double cost) {
    if (cost >= best_cost) return;
    if (j == m) {
      best_cost = cost;
      best = current;
      return;
    }
    for (std::size_t h = 0; h < k; ++h) {
      if (left[h] == 0) continue;
      --left[h];
      current[j] = static_cast<int>(h);
      go(j + 1, cost + half_sq(latents[j], centers[h]));
      ++left[h];
    }
  };
  go(0, 0.0);
  return best;
}

double assignment_objective(std::span<const double> latents, std::span<const double> centers,
                            std::span<const int> labels, std::span<const std::uint8_t> slack) {
  double s = 0.0;
  for (std::size_t j = 0; j < latents.size(); ++j) {
    if (!slack.empty() && slack[j]) continue;
    s += half_sq(latents[j], centers[static_cast<std::size_t>(labels[j])]);
  }
  return s;
}

std::vector<double> update_centers(std::span<const double> latents, std::span<const int> labels,
                                   std::span<const double> previous, std::span<const std::uint8_t> slack) {
  std::vector<double> sum(previous.size(), 0.0);
  std::vector<long long> count(previous.size(), 0);
  for (std::size_t j = 0; j < latents.size(); ++j) {
    if (!slack.empty() && slack[j]) continue;
    sum[static_cast<std::size_t>(labels[j])] += latents[j];
    ++count[static_cast<std::size_t>(labels[j])];
  }
  std::vector<double> out(previous.begin(), previous.end());
  for (std::size_t h = 0; h < out.size(); ++h)
    if (count[h] > 0) out[h] = sum[h] / static_cast<double>(count[h]);
  return out;
}

std::vector<double> initial_centers(std::span<const double> latents, std::span<const long long> targets) {
  std::vector<double> sorted(latents.begin(), latents.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out(targets.size(), 0.0);
  if (sorted.empty()) return out;
  const long long last = static_cast<long long>(sorted.size()) - 1;
  long long before = 0;
  for (std::size_t h = 0; h < targets.size(); ++h) {
    const long long pos = std::clamp(before + targets[h] / 2, 0LL, last);
    out[h] = sorted[static_cast<std::size_t>(pos)];
    before += targets[h];
  }
  return out;
}

AssignmentState fit(std::span<const double> latents, const ClusterSpec& spec, std::optional<std::vector<double>> initial,
                    const FitOptions& options) {
  AssignmentState st;
  st.latents.assign(latents.begin(), latents.end());
  st.centers = initial ? std::move(*initial) : initial_centers(latents, spec.targets);
  if (st.centers.size() != spec.k()) throw std::invalid_argument("fit: initial centers have the wrong length");

  for (int it = 1; it <= options.max_iterations; ++it) {
    st.labels = assign_with_constraints(latents, st.centers, spec.targets, options.slack, &st.slack);
    auto next = update_centers(latents, st.labels, st.centers, st.slack);
    double shift = 0.0;
    for (std::size_t h = 0; h < next.size(); ++h) shift = std::max(shift, std::abs(next[h] - st.centers[h]));
    st.centers = std::move(next);
    st.iterations = it;
    st.objective = assignment_objective(latents, st.centers, st.labels, st.slack);
    st.objective_history.push_back(st.objective);
    if (shift < options.tolerance) break;
  }
  if (options.max_iterations <= 0) {
    st.labels = assign_with_constraints(latents, st.centers, spec.targets, options.slack, &st.slack);
    st.objective = assignment_objective(latents, st.centers, st.labels, st.slack);
  }
  return st;
}

bool GroundtruthOverlay::allows(std::size_t j, int h) const {
  return std::find(allowed[j].begin(), allowed[j].end(), h) != allowed[j].end();
}

std::size_t GroundtruthOverlay::covered_count() const {
  std::size_t n = 0;
  for (const auto& a : allowed) n += a.empty() ? 0 : 1;
  return n;
}

std::vector<double> label_weights(const GroundtruthOverlay& overlay, std::size_t k) {
  std::vector<double> count(k, 0.0);
  for (const auto& a : overlay.allowed)
    for (int h : a) count[static_cast<std::size_t>(h)] += 1.0;
  std::vector<double> w(k, 0.0);
  double total = 0.0;
  for (std::size_t h = 0; h < k; ++h)
    if (count[h] > 0.0) total += (w[h] = 1.0 / count[h]);
  if (total == 0.0) {
    std::fill(w.begin(), w.end(), k ? 1.0 / static_cast<double>(k) : 0.0);
    return w;
  }
  for (double& x : w) x /= total;
  return w;
}

ClusteringLoss clustering_loss(const AssignmentState& state, const GroundtruthOverlay& overlay,
                               std::span<const double> weights) {
  const std::size_t m = state.latents.size(), k = state.centers.size();
  if (weights.size() != k) throw ValidationError("clustering_loss: weight vector length differs from k");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("clustering_loss: negative label weight");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw ValidationError("clustering_loss: label weights sum to " + csv::format_double(wsum));
  if (overlay.size() != m) throw std::invalid_argument("clustering_loss: overlay size differs from pixel count");

  ClusteringLoss out;
  out.latent_gradient.assign(m, 0.0);
  out.targets.assign(m, 0);
  for (std::size_t j = 0; j < m; ++j) {
    const double z = state.latents[j];
    int target = state.labels[j];
    if (overlay.covered(j)) {
      double best = std::numeric_limits<double>::infinity();
      for (int h : overlay.allowed[j]) {
        const double d = std::abs(z - state.centers[static_cast<std::size_t>(h)]);
        if (d < best || (d == best && h < target)) {
          best = d;
          target = h;
        }
      }
    }
    const double diff = z - state.centers[static_cast<std::size_t>(target)];
    const double w = weights[static_cast<std::size_t>(target)];
    out.targets[j] = target;
    out.value += w * std::abs(diff);
    out.latent_gradient[j] = diff > 0.0 ? w : (diff < 0.0 ? -w : 0.0);
  }
  return out;
}

}  // namespace ccc
