#include "ccc/config.hpp"

#include <array>

#include "ccc/csv.hpp"
#include "ccc/error.hpp"

namespace ccc {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

constexpr std::array<std::string_view, 10> kTrainKeys = {
    "epochs",        "seed",          "fold_count",         "batch_size", "learning_rate", "convergence_window",
    "fit_tolerance", "fit_max_iterations", "slack",       "restarts"};

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    bool quoted = false;
    std::size_t cut = line.size();
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        cut = i;
        break;
      }
    }
    line = trim(line.substr(0, cut));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw SchemaError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw SchemaError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (cfg.values_.count(key)) throw SchemaError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
    cfg.values_.emplace(key, std::string(value));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::read(const std::filesystem::path& path) {
  return parse(csv::read_file(path), path.string());
}

bool KeyValueConfig::has(std::string_view key) const { return values_.find(key) != values_.end(); }

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

TrainConfig train_config_from(const KeyValueConfig& config, TrainConfig c) {
  for (const auto& [key, value] : config.values()) {
    bool known = false;
    for (auto k : kTrainKeys) known = known || k == key;
    if (!known) throw SchemaError(config.origin() + ": unknown key '" + key + "'");
  }
  const std::string& o = config.origin();
  auto integer = [&](std::string_view key) { return csv::parse_integer(*config.get(key), o + ": " + std::string(key)); };
  auto real = [&](std::string_view key) { return csv::parse_double(*config.get(key), o + ": " + std::string(key)); };

  if (config.has("epochs")) c.epochs = static_cast<int>(integer("epochs"));
  if (config.has("seed")) c.seed = static_cast<std::uint64_t>(integer("seed"));
  if (config.has("fold_count")) c.fold_count = static_cast<int>(integer("fold_count"));
  if (config.has("batch_size")) {
    const long long b = integer("batch_size");
    if (b < 0) throw ValidationError(o + ": batch_size must be non-negative");
    c.batch_size = static_cast<std::size_t>(b);
  }
  if (config.has("learning_rate")) c.learning_rate = real("learning_rate");
  if (config.has("convergence_window")) c.convergence_window = static_cast<int>(integer("convergence_window"));
  if (config.has("fit_tolerance")) c.fit.tolerance = real("fit_tolerance");
  if (config.has("fit_max_iterations")) c.fit.max_iterations = static_cast<int>(integer("fit_max_iterations"));
  if (auto s = config.get("slack")) {
    if (*s == "absorb") c.fit.slack = SlackPolicy::absorb;
    else if (*s == "forbid") c.fit.slack = SlackPolicy::forbid;
    else throw ValidationError(o + ": slack must be absorb or forbid");
  }
  if (config.has("restarts")) c.restarts = static_cast<int>(integer("restarts"));
  c.validate();
  return c;
}

KeyValueConfig to_key_values(const TrainConfig& c) {
  KeyValueConfig kv;
  kv.set("epochs", std::to_string(c.epochs));
  kv.set("seed", std::to_string(c.seed));
  kv.set("fold_count", std::to_string(c.fold_count));
  kv.set("batch_size", std::to_string(c.batch_size));
  kv.set("learning_rate", csv::format_double(c.learning_rate));
  kv.set("convergence_window", std::to_string(c.convergence_window));
  kv.set("fit_tolerance", csv::format_double(c.fit.tolerance));
  kv.set("fit_max_iterations", std::to_string(c.fit.max_iterations));
  kv.set("restarts", std::to_string(c.restarts));
  kv.set("slack", c.fit.slack == SlackPolicy::absorb ? "absorb" : "forbid");
  return kv;
}

}  // namespace ccc
