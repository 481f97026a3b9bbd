#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ccc/census.hpp"
#include "ccc/constrained_kmeans.hpp"
#include "ccc/pixel_selector.hpp"

namespace ccc {

// Interval of building heights in metres, e.g. "[6,9)" or "[24,+inf)".
struct HeightRange {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_closed = true;
  bool upper_closed = false;

  bool contains(double h) const;
  std::string label() const;
  static HeightRange parse(std::string_view text);
  bool operator==(const HeightRange&) const = default;
};

// Which target classes a groundtruth label is compatible with.
class LabelMapping {
 public:
  using Allowed = std::vector<std::string>;

  void add(Indicator indicator, const std::string& gt_label, const std::string& target_class);
  void add_height(const HeightRange& range, const std::string& target_class);

  // Allowed classes for a building-type label (roof, wall) or nullptr.
  const Allowed* allowed(Indicator indicator, std::string_view gt_label) const;
  // Allowed height classes for a height in metres, or nullptr.
  const Allowed* allowed_height(double height_m) const;

  // Throws ValidationError unless every label has a non-empty set and the
  // height ranges are disjoint and cover (0, +inf).
  void validate() const;

  // mapping_roof.csv, mapping_wall.csv, mapping_height.csv with gt_label,target_class.
  static LabelMapping read(const std::filesystem::path& dir);
  void write(const std::filesystem::path& dir) const;

  const std::map<std::string, Allowed>& labels(Indicator indicator) const;
  const std::vector<std::pair<HeightRange, Allowed>>& height_ranges() const { return height_; }

 private:
  std::map<std::string, Allowed> roof_;
  std::map<std::string, Allowed> wall_;
  std::vector<std::pair<HeightRange, Allowed>> height_;
};

// Building-type labels and height ranges of the Kigali building typology,
// mapped onto the census roof/wall classes and the height classes.
LabelMapping default_label_mapping();

struct GroundtruthRecord {
  std::string sector_id;
  Pixel pixel;
  std::string building_type;       // empty when unknown
  std::optional<double> height_m;  // empty when unknown
};

// gt.csv: sector_id,row,col,building_type_label,height_m
std::vector<GroundtruthRecord> read_groundtruth(const std::filesystem::path& path);
std::vector<GroundtruthRecord> parse_groundtruth(std::string_view text, const std::string& origin = "<memory>");
std::string write_groundtruth(const std::vector<GroundtruthRecord>& records);

// Allowed class indices per pixel for one indicator. Pixels without a
// matching record stay uncovered. Throws SchemaError for unmapped labels or
// mapped classes missing from class_names.
GroundtruthOverlay build_overlay(std::span<const Pixel> pixels, const std::vector<GroundtruthRecord>& records,
                                 std::string_view sector_id, const LabelMapping& mapping, Indicator indicator,
                                 const std::vector<std::string>& class_names);

// Share of covered pixels whose prediction lies in the allowed set; nullopt
// when no pixel is covered.
std::optional<double> modified_precision(std::span<const int> predictions, const GroundtruthOverlay& overlay);

// r_h = |M| / (k |C_h|); zero-size classes get 0.
std::vector<double> class_weights(std::span<const long long> sizes, std::size_t k, long long total_pixels);

// Mean of r_h * p_h over classes with r_h > 0.
double weighted_precision(std::span<const double> per_class_precision, std::span<const double> weights);

struct IndicatorScore {
  Indicator indicator = Indicator::roof;
  std::size_t covered = 0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::optional<double> precision;
  std::optional<double> weighted;
  std::vector<double> class_weights;
};

struct PrecisionReport {
  std::string sector_id;
  std::vector<IndicatorScore> scores;

  const IndicatorScore* score(Indicator indicator) const;
};

IndicatorScore score_indicator(Indicator indicator, std::span<const int> predictions, const GroundtruthOverlay& overlay,
                               std::size_t k);

// report.csv: sector_id,indicator,covered,tp,fp,precision,weighted_precision
std::string write_reports(const std::vector<PrecisionReport>& reports);

}  // namespace ccc
