#include "ccc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccc/csv.hpp"
#include "ccc/error.hpp"

namespace ccc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string bound(double v) { return std::isinf(v) ? "+inf" : csv::format_double(v); }

}  // namespace

bool HeightRange::contains(double h) const {
  const bool lo = lower_closed ? h >= lower : h > lower;
  const bool hi = upper_closed ? h <= upper : h < upper;
  return lo && hi;
}

std::string HeightRange::label() const {
  return std::string(lower_closed ? "[" : "(") + bound(lower) + "," + bound(upper) + (upper_closed ? "]" : ")");
}

HeightRange HeightRange::parse(std::string_view text) {
  const std::string t(text);
  auto bad = [&] { return ValidationError("malformed height range '" + t + "'"); };
  if (t.size() < 5) throw bad();
  HeightRange r;
  if (t.front() == '[') r.lower_closed = true;
  else if (t.front() == '(') r.lower_closed = false;
  else throw bad();
  if (t.back() == ']') r.upper_closed = true;
  else if (t.back() == ')') r.upper_closed = false;
  else throw bad();
  const auto comma = t.find(',');
  if (comma == std::string::npos) throw bad();
  auto value = [&](std::string s) {
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    if (s == "+inf" || s == "inf" || s == "+infinity") return kInf;
    return csv::parse_double(s, "height range '" + t + "'");
  };
  r.lower = value(t.substr(1, comma - 1));
  r.upper = value(t.substr(comma + 1, t.size() - comma - 2));
  if (!(r.lower < r.upper)) throw bad();
  return r;
}

void LabelMapping::add(Indicator indicator, const std::string& gt_label, const std::string& target_class) {
  auto& m = indicator == Indicator::roof ? roof_ : indicator == Indicator::wall ? wall_
                                                    : throw ValidationError("add: use add_height for heights");
  auto& v = m[gt_label];
  if (std::find(v.begin(), v.end(), target_class) == v.end()) v.push_back(target_class);
}

void LabelMapping::add_height(const HeightRange& range, const std::string& target_class) {
  auto it = std::find_if(height_.begin(), height_.end(), [&](const auto& e) { return e.first == range; });
  if (it == height_.end()) {
    height_.emplace_back(range, Allowed{});
    it = std::prev(height_.end());
  }
  if (std::find(it->second.begin(), it->second.end(), target_class) == it->second.end())
    it->second.push_back(target_class);
}

const LabelMapping::Allowed* LabelMapping::allowed(Indicator indicator, std::string_view gt_label) const {
  const auto& m = labels(indicator);
  auto it = m.find(std::string(gt_label));
  return it == m.end() ? nullptr : &it->second;
}

const LabelMapping::Allowed* LabelMapping::allowed_height(double height_m) const {
  for (const auto& [range, allowed] : height_)
    if (range.contains(height_m)) return &allowed;
  return nullptr;
}

const std::map<std::string, LabelMapping::Allowed>& LabelMapping::labels(Indicator indicator) const {
  if (indicator == Indicator::roof) return roof_;
  if (indicator == Indicator::wall) return wall_;
  throw ValidationError("no building-type label mapping for indicator " + std::string(to_string(indicator)));
}

void LabelMapping::validate() const {
  for (const auto* m : {&roof_, &wall_})
    for (const auto& [label, allowed] : *m)
      if (allowed.empty()) throw ValidationError("label '" + label + "' maps to no class");
  if (height_.empty()) return;
  std::vector<HeightRange> ranges;
  for (const auto& [r, allowed] : height_) {
    if (allowed.empty()) throw ValidationError("height range " + r.label() + " maps to no class");
    ranges.push_back(r);
  }
  std::sort(ranges.begin(), ranges.end(), [](const auto& a, const auto& b) { return a.lower < b.lower; });
  if (ranges.front().lower != 0.0 || ranges.back().upper != kInf)
    throw ValidationError("height ranges must cover (0, +inf)");
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    const auto& a = ranges[i - 1];
    const auto& b = ranges[i];
    if (a.upper != b.lower || a.upper_closed == b.lower_closed)
      throw ValidationError("height ranges " + a.label() + " and " + b.label() + " overlap or leave a gap");
  }
}

LabelMapping LabelMapping::read(const std::filesystem::path& dir) {
  LabelMapping m;
  for (Indicator ind : kLatentIndicators) {
    auto path = dir / ("mapping_" + std::string(to_string(ind)) + ".csv");
    auto t = csv::Table::read(path);
    for (std::size_t r = 0; r < t.size(); ++r) {
      if (ind == Indicator::height) m.add_height(HeightRange::parse(t.at(r, "gt_label")), t.at(r, "target_class"));
      else m.add(ind, t.at(r, "gt_label"), t.at(r, "target_class"));
    }
  }
  m.validate();
  return m;
}

void LabelMapping::write(const std::filesystem::path& dir) const {
  for (Indicator ind : {Indicator::roof, Indicator::wall}) {
    csv::Writer w({"gt_label", "target_class"});
    for (const auto& [label, allowed] : labels(ind))
      for (const auto& c : allowed) w.row({label, c});
    w.save(dir / ("mapping_" + std::string(to_string(ind)) + ".csv"));
  }
  csv::Writer w({"gt_label", "target_class"});
  for (const auto& [range, allowed] : height_)
    for (const auto& c : allowed) w.row({range.label(), c});
  w.save(dir / "mapping_height.csv");
}

LabelMapping default_label_mapping() {
  LabelMapping m;
  const std::string iron = "Iron Sheets", tiles = "Local, Industrial, and Asbestos Tiles", concrete = "Concrete",
                    grass = "Grass";
  const std::string rudimentary = "Rudimentary, basic or unplanned buildings",
                    block = "Building in block structure or large courtyard buildings",
                    bungalow = "Bungalow-type buildings", villa = "Villa-type buildings",
                    multi = "Low to mid-rise multi-unit buildings", high = "High-rise buildings", halls = "Halls";
  auto roof = [&](const std::string& label, std::initializer_list<std::string> classes) {
    for (const auto& c : classes) m.add(Indicator::roof, label, c);
  };
  roof(rudimentary, {iron, grass});
  roof(block, {iron});
  roof(bungalow, {iron, tiles});
  roof(villa, {iron, tiles});
  roof(multi, {iron, tiles});
  roof(high, {iron, concrete});
  roof(halls, {iron});

  const std::string others = "Others", burnt = "Burnt bricks", cement = "Cement blocks", stone = "Stone",
                    adobe = "Sun-dried bricks", timber = "Timber", mud = "Wood with mud";
  auto wall = [&](const std::string& label, std::initializer_list<std::string> classes) {
    for (const auto& c : classes) m.add(Indicator::wall, label, c);
  };
  wall(rudimentary, {others, burnt, cement, concrete, stone, adobe, timber, mud});
  wall(block, {others, burnt, cement, concrete, adobe});
  wall(bungalow, {burnt, cement, concrete, adobe, mud});
  wall(villa, {cement, concrete, adobe});
  wall(multi, {cement, concrete});
  wall(high, {concrete});
  wall(halls, {burnt, cement, concrete, adobe});

  auto height = [&](const char* range, std::initializer_list<std::string> classes) {
    for (const auto& c : classes) m.add_height(HeightRange::parse(range), c);
  };
  height("(0,6)", {"H:1", "H:2"});
  height("[6,9)", {"H:2", "H:3", "HBET:3-6"});
  height("[9,12)", {"H:3", "HBET:3-6", "HBET:4-7"});
  height("[12,21)", {"HBET:3-6", "HBET:4-7"});
  height("[21,24)", {"HBET:4-7", "HBET:8+"});
  height("[24,+inf)", {"HBET:8+"});
  m.validate();
  return m;
}

std::vector<GroundtruthRecord> parse_groundtruth(std::string_view text, const std::string& origin) {
  auto t = csv::Table::parse(text, origin);
  std::vector<GroundtruthRecord> out;
  out.reserve(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    GroundtruthRecord g;
    g.sector_id = t.at(r, "sector_id");
    g.pixel = {static_cast<int>(t.integer(r, "row")), static_cast<int>(t.integer(r, "col"))};
    g.building_type = t.at(r, "building_type_label");
    if (!t.at(r, "height_m").empty()) g.height_m = t.number(r, "height_m");
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<GroundtruthRecord> read_groundtruth(const std::filesystem::path& path) {
  return parse_groundtruth(csv::read_file(path), path.string());
}

std::string write_groundtruth(const std::vector<GroundtruthRecord>& records) {
  csv::Writer w({"sector_id", "row", "col", "building_type_label", "height_m"});
  for (const auto& g : records)
    w.row({g.sector_id, std::to_string(g.pixel.row), std::to_string(g.pixel.col), g.building_type,
           g.height_m ? csv::format_double(*g.height_m) : std::string()});
  return w.str();
}

GroundtruthOverlay build_overlay(std::span<const Pixel> pixels, const std::vector<GroundtruthRecord>& records,
                                 std::string_view sector_id, const LabelMapping& mapping, Indicator indicator,
                                 const std::vector<std::string>& class_names) {
  std::map<Pixel, const GroundtruthRecord*> by_pixel;
  for (const auto& g : records)
    if (g.sector_id == sector_id) by_pixel[g.pixel] = &g;

  GroundtruthOverlay overlay = GroundtruthOverlay::uncovered(pixels.size());
  for (std::size_t j = 0; j < pixels.size(); ++j) {
    auto it = by_pixel.find(pixels[j]);
    if (it == by_pixel.end()) continue;
    const auto& g = *it->second;
    const LabelMapping::Allowed* allowed = nullptr;
    if (indicator == Indicator::height) {
      if (!g.height_m) continue;
      allowed = mapping.allowed_height(*g.height_m);
      if (!allowed)
        throw SchemaError("no height range contains " + csv::format_double(*g.height_m) + " m (sector " +
                          std::string(sector_id) + ")");
    } else {
      if (g.building_type.empty()) continue;
      allowed = mapping.allowed(indicator, g.building_type);
      if (!allowed)
        throw SchemaError("groundtruth label '" + g.building_type + "' has no " + std::string(to_string(indicator)) +
                          " mapping");
    }
    for (const auto& name : *allowed) {
      auto c = std::find(class_names.begin(), class_names.end(), name);
      if (c == class_names.end())
        throw SchemaError("mapping names " + std::string(to_string(indicator)) + " class '" + name +
                          "' which the constraints do not define");
      overlay.allowed[j].push_back(static_cast<int>(c - class_names.begin()));
    }
    std::sort(overlay.allowed[j].begin(), overlay.allowed[j].end());
  }
  return overlay;
}

std::optional<double> modified_precision(std::span<const int> predictions, const GroundtruthOverlay& overlay) {
  if (predictions.size() != overlay.size()) throw std::invalid_argument("modified_precision: size mismatch");
  std::size_t covered = 0, hits = 0;
  for (std::size_t j = 0; j < predictions.size(); ++j) {
    if (!overlay.covered(j)) continue;
    ++covered;
    if (overlay.allows(j, predictions[j])) ++hits;
  }
  if (covered == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(covered);
}

std::vector<double> class_weights(std::span<const long long> sizes, std::size_t k, long long total_pixels) {
  std::vector<double> r(sizes.size(), 0.0);
  for (std::size_t h = 0; h < sizes.size(); ++h)
    if (sizes[h] > 0)
      r[h] = static_cast<double>(total_pixels) / (static_cast<double>(k) * static_cast<double>(sizes[h]));
  return r;
}

double weighted_precision(std::span<const double> per_class_precision, std::span<const double> weights) {
  if (per_class_precision.size() != weights.size()) throw std::invalid_argument("weighted_precision: size mismatch");
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t h = 0; h < weights.size(); ++h) {
    if (!(weights[h] > 0.0)) continue;
    s += weights[h] * per_class_precision[h];
    ++n;
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

const IndicatorScore* PrecisionReport::score(Indicator indicator) const {
  for (const auto& s : scores)
    if (s.indicator == indicator) return &s;
  return nullptr;
}

IndicatorScore score_indicator(Indicator indicator, std::span<const int> predictions, const GroundtruthOverlay& overlay,
                               std::size_t k) {
  IndicatorScore s;
  s.indicator = indicator;
  std::vector<long long> sizes(k, 0), covered_by_class(k, 0), hits_by_class(k, 0);
  for (std::size_t j = 0; j < predictions.size(); ++j) {
    const auto h = static_cast<std::size_t>(predictions[j]);
    ++sizes[h];
    if (!overlay.covered(j)) continue;
    ++s.covered;
    ++covered_by_class[h];
    if (overlay.allows(j, predictions[j])) {
      ++s.true_positives;
      ++hits_by_class[h];
    } else {
      ++s.false_positives;
    }
  }
  s.precision = modified_precision(predictions, overlay);
  s.class_weights = class_weights(sizes, k, static_cast<long long>(predictions.size()));
  if (s.covered > 0) {
    std::vector<double> per_class(k, 0.0), w = s.class_weights;
    for (std::size_t h = 0; h < k; ++h) {
      if (covered_by_class[h] == 0) w[h] = 0.0;  // precision undefined for this class
      else per_class[h] = static_cast<double>(hits_by_class[h]) / static_cast<double>(covered_by_class[h]);
    }
    s.weighted = weighted_precision(per_class, w);
  }
  return s;
}

std::string write_reports(const std::vector<PrecisionReport>& reports) {
  csv::Writer w({"sector_id", "indicator", "covered", "tp", "fp", "precision", "weighted_precision"});
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  for (const auto& r : reports)
    for (const auto& s : r.scores)
      w.row({r.sector_id, std::string(to_string(s.indicator)), std::to_string(s.covered),
             std::to_string(s.true_positives), std::to_string(s.false_positives), opt(s.precision), opt(s.weighted)});
  return w.str();
}

}  // namespace ccc
