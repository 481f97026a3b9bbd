#include "ccc/taxonomy.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "ccc/error.hpp"

namespace ccc {

namespace {

// Pixel indices per wall class, each sorted by latent then index.
std::vector<std::vector<std::size_t>> wall_groups(std::span<const int> labels, std::size_t k,
                                                  std::span<const double> latents) {
  if (labels.size() != latents.size()) throw std::invalid_argument("wall labels and latents differ in length");
  std::vector<std::vector<std::size_t>> groups(k);
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] < 0 || static_cast<std::size_t>(labels[j]) >= k)
      throw ValidationError("wall label " + std::to_string(labels[j]) + " out of range");
    groups[static_cast<std::size_t>(labels[j])].push_back(j);
  }
  for (auto& g : groups)
    std::stable_sort(g.begin(), g.end(), [&](std::size_t a, std::size_t b) { return latents[a] < latents[b]; });
  return groups;
}

long long lookup(const ClassCounts& counts, const std::string& name) {
  for (const auto& [n, c] : counts)
    if (n == name) return c;
  return 0;
}

}  // namespace

ClassCounts MacroAllocation::counts(const std::vector<std::string>& order) const {
  ClassCounts out;
  for (const auto& name : order) out.emplace_back(name, 0);
  for (const auto& l : labels) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == l; });
    if (it == out.end()) out.emplace_back(l, 1);
    else ++it->second;
  }
  return out;
}

MacroAllocation assign_macro(std::string sector_id, std::span<const int> wall_labels,
                             const std::vector<std::string>& wall_classes, std::span<const double> wall_latents,
                             std::span<const Settlement> settlement, const ConditionalTable& wall_macro) {
  if (settlement.size() != wall_labels.size())
    throw std::invalid_argument("assign_macro: settlement and wall labels differ in length");
  MacroAllocation out;
  out.sector_id = std::move(sector_id);
  out.labels.assign(wall_labels.size(), std::string());

  const auto groups = wall_groups(wall_labels, wall_classes.size(), wall_latents);
  for (std::size_t w = 0; w < wall_classes.size(); ++w) {
    for (Settlement s : {Settlement::urban, Settlement::rural}) {
      MacroGroup g;
      g.wall_class = wall_classes[w];
      g.settlement = s;
      for (std::size_t j : groups[w])
        if (settlement[j] == s) g.pixels.push_back(j);
      if (g.pixels.empty()) continue;

      auto rows = wall_macro.rows_for(g.wall_class, s);
      if (rows.empty())
        throw SchemaError("no wall->macro row for wall class '" + g.wall_class + "' (" + std::string(to_string(s)) +
                          ")");
      std::vector<double> probs;
      for (const auto* r : rows) {
        g.macro_classes.push_back(r->target);
        probs.push_back(r->probability);
      }
      g.quotas = apportion(static_cast<long long>(g.pixels.size()), probs);
      std::size_t pos = 0;
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (long long q = 0; q < g.quotas[r]; ++q) out.labels[g.pixels[pos++]] = rows[r]->target;
      out.groups.push_back(std::move(g));
    }
  }
  return out;
}

MacroAllocation assign_macro(std::string sector_id, std::span<const int> wall_labels,
                             const std::vector<std::string>& wall_classes, std::span<const double> wall_latents,
                             Settlement settlement, const ConditionalTable& wall_macro) {
  if (settlement == Settlement::any) throw ValidationError("assign_macro: settlement type must be urban or rural");
  const std::vector<Settlement> s(wall_labels.size(), settlement);
  return assign_macro(std::move(sector_id), wall_labels, wall_classes, wall_latents, s, wall_macro);
}

std::vector<Settlement> split_settlement(std::span<const int> wall_labels, const std::vector<std::string>& wall_classes,
                                         std::span<const double> wall_latents, const ClassCounts& urban_wall_pixels,
                                         const ClassCounts& rural_wall_pixels) {
  std::vector<Settlement> out(wall_labels.size(), Settlement::urban);
  long long urban_total = 0, rural_total = 0;
  for (const auto& [n, c] : urban_wall_pixels) urban_total += c;
  for (const auto& [n, c] : rural_wall_pixels) rural_total += c;

  const auto groups = wall_groups(wall_labels, wall_classes.size(), wall_latents);
  for (std::size_t w = 0; w < wall_classes.size(); ++w) {
    const auto& g = groups[w];
    if (g.empty()) continue;
    double u = static_cast<double>(lookup(urban_wall_pixels, wall_classes[w]));
    double r = static_cast<double>(lookup(rural_wall_pixels, wall_classes[w]));
    if (u + r == 0.0) {
      u = static_cast<double>(urban_total);
      r = static_cast<double>(rural_total);
    }
    if (u + r == 0.0) u = 1.0;
    const auto split = apportion(static_cast<long long>(g.size()), {u / (u + r), r / (u + r)});
    for (std::size_t i = static_cast<std::size_t>(split[0]); i < g.size(); ++i) out[g[i]] = Settlement::rural;
  }
  return out;
}

}  // namespace ccc
