#pragma once

#include <span>
#include <string>
#include <vector>

#include "ccc/census.hpp"

namespace ccc {

struct MacroGroup {
  std::string wall_class;
  Settlement settlement = Settlement::urban;
  std::vector<std::size_t> pixels;  // fill order: ascending wall latent
  std::vector<std::string> macro_classes;
  std::vector<long long> quotas;
};

struct MacroAllocation {
  std::string sector_id;
  std::vector<MacroGroup> groups;
  std::vector<std::string> labels;  // macro class per pixel

  // Pixels per macro class, in the order the classes first appear in `order`.
  ClassCounts counts(const std::vector<std::string>& order) const;
};

// Macro-taxonomy label per pixel. Each (wall class, settlement) group gets
// largest-remainder quotas over its wall->macro probabilities and is filled
// in table row order, lowest wall latent first. Throws SchemaError when the
// table has no rows for a populated group.
MacroAllocation assign_macro(std::string sector_id, std::span<const int> wall_labels,
                             const std::vector<std::string>& wall_classes, std::span<const double> wall_latents,
                             std::span<const Settlement> settlement, const ConditionalTable& wall_macro);

// Same, with one settlement type for the whole sector.
MacroAllocation assign_macro(std::string sector_id, std::span<const int> wall_labels,
                             const std::vector<std::string>& wall_classes, std::span<const double> wall_latents,
                             Settlement settlement, const ConditionalTable& wall_macro);

// Splits each wall class's pixels between urban and rural in proportion to
// the two settlement types' wall pixel targets; the lower wall latents go to
// urban. Classes without targets follow the sector's overall split.
std::vector<Settlement> split_settlement(std::span<const int> wall_labels, const std::vector<std::string>& wall_classes,
                                         std::span<const double> wall_latents, const ClassCounts& urban_wall_pixels,
                                         const ClassCounts& rural_wall_pixels);

}  // namespace ccc
