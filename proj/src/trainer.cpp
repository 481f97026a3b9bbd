#include "ccc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ccc/csv.hpp"
#include "ccc/error.hpp"

namespace ccc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> column(const Matrix& m, std::size_t c) {
  std::vector<double> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = m(r, c);
  return out;
}

std::vector<SectorPass> evaluate_all(const NetworkParameters& params, std::span<const SectorData> sectors,
                                     const FitOptions& fit, int epoch) {
  std::vector<SectorPass> passes(sectors.size());
  std::vector<std::string> failures(sectors.size());
#pragma omp parallel for schedule(static)
  for (std::size_t s = 0; s < sectors.size(); ++s) {
    try {
      passes[s] = evaluate_sector(params, sectors[s], fit);
    } catch (const NumericalError& e) {
      failures[s] = e.what();
    }
  }
  for (std::size_t s = 0; s < sectors.size(); ++s) {
    if (!failures[s].empty())
      throw NumericalError("epoch " + std::to_string(epoch) + ", sector " + sectors[s].sector_id() + ": " + failures[s]);
    if (!std::isfinite(passes[s].reconstruction))
      throw NumericalError("epoch " + std::to_string(epoch) + ", sector " + sectors[s].sector_id() +
                           ": reconstruction loss is not finite");
    if (!std::isfinite(passes[s].clustering))
      throw NumericalError("epoch " + std::to_string(epoch) + ", sector " + sectors[s].sector_id() +
                           ": clustering loss is not finite");
  }
  return passes;
}

std::array<IndicatorMetrics, 3> pooled_metrics(std::span<const SectorPass> passes,
                                               std::span<const SectorData> sectors) {
  std::array<IndicatorMetrics, 3> out;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t s = 0; s < sectors.size(); ++s) {
      const auto& overlay = sectors[s].overlays[i];
      const auto& labels = passes[s].states[i].labels;
      for (std::size_t j = 0; j < overlay.size(); ++j) {
        if (!overlay.covered(j)) continue;
        ++out[i].covered;
        if (overlay.allows(j, labels[j])) ++out[i].true_positives;
      }
    }
    if (out[i].covered > 0)
      out[i].precision = static_cast<double>(out[i].true_positives) / static_cast<double>(out[i].covered);
  }
  return out;
}

EpochRecord summarize(int epoch, std::span<const SectorPass> passes, std::span<const SectorData> sectors) {
  EpochRecord rec;
  rec.epoch = epoch;
  std::size_t n = 0;
  for (std::size_t s = 0; s < sectors.size(); ++s) {
    if (sectors[s].size() == 0) continue;
    rec.reconstruction += passes[s].reconstruction;
    rec.clustering += passes[s].clustering;
    ++n;
  }
  if (n > 0) {
    rec.reconstruction /= static_cast<double>(n);
    rec.clustering /= static_cast<double>(n);
  }
  rec.total = rec.reconstruction + rec.clustering;
  rec.train = pooled_metrics(passes, sectors);
  return rec;
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

bool SectorData::has_groundtruth() const {
  return std::any_of(overlays.begin(), overlays.end(), [](const auto& o) { return o.covered_count() > 0; });
}

SectorData make_sector_data(FeatureMatrix features, const std::vector<ConstraintSet>& constraints,
                            const std::vector<GroundtruthRecord>* groundtruth, const LabelMapping* mapping) {
  SectorData d;
  const auto sectors = constraint_sectors(constraints);
  if (std::find(sectors.begin(), sectors.end(), features.sector_id) == sectors.end())
    throw SchemaError("sector " + features.sector_id + " has features but no constraints");
  for (std::size_t i = 0; i < 3; ++i) {
    const Indicator ind = kLatentIndicators[i];
    d.specs[i] = make_cluster_spec(ind, sector_pixel_targets(constraints, features.sector_id, ind));
    if (groundtruth && mapping)
      d.overlays[i] = build_overlay(features.pixels, *groundtruth, features.sector_id, *mapping, ind,
                                    d.specs[i].class_names);
    else
      d.overlays[i] = GroundtruthOverlay::uncovered(features.size());
  }
  d.features = std::move(features);
  return d;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ValidationError("epochs must be non-negative");
  if (fold_count < 2) throw ValidationError("fold_count must be at least 2");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (convergence_window < 0) throw ValidationError("convergence_window must be non-negative");
  if (restarts < 1) throw ValidationError("restarts must be at least 1");
  if (!(fit.tolerance > 0.0) || fit.max_iterations < 1) throw ValidationError("invalid clustering fit options");
}

JointLoss joint_loss(const NetworkParameters& params, const Matrix& x, const JointTargets& targets) {
  const std::size_t m = x.rows();
  const ForwardPass pass = forward(params, x);
  const Matrix& xh = pass.reconstruction();
  const Matrix& z = pass.latents();

  JointLoss out;
  Matrix grad_recon(m, x.cols());
  for (std::size_t j = 0; j < m; ++j) {
    const double scale = targets.row_scale[j];
    double e = 0.0;
    for (std::size_t f = 0; f < x.cols(); ++f) {
      const double d = xh(j, f) - x(j, f);
      e += d * d;
      grad_recon(j, f) = 2.0 * scale * d;
    }
    out.reconstruction += scale * e;
  }
  Matrix grad_latent(m, z.cols());
  for (std::size_t i = 0; i < 3 && i < z.cols(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = z(j, i) - targets.center[i][j];
      const double w = targets.weight[i][j];
      out.clustering += w * std::abs(d);
      grad_latent(j, i) = d > 0.0 ? w : (d < 0.0 ? -w : 0.0);
    }
  }
  out.gradient = backward(params, pass, grad_recon, grad_latent);
  return out;
}

SectorPass evaluate_sector(const NetworkParameters& params, const SectorData& sector, const FitOptions& fit_options) {
  SectorPass sp;
  if (sector.size() == 0) return sp;
  sp.pass = forward(params, sector.features.values);
  sp.reconstruction = reconstruction_loss(sector.features.values, sp.pass.reconstruction());
  for (std::size_t i = 0; i < 3; ++i) {
    const auto z = column(sp.pass.latents(), i);
    sp.states[i] = fit(z, sector.specs[i], std::nullopt, fit_options);
    sp.weights[i] = label_weights(sector.overlays[i], sector.specs[i].k());
    sp.losses[i] = clustering_loss(sp.states[i], sector.overlays[i], sp.weights[i]);
    sp.clustering += sp.losses[i].value;
  }
  return sp;
}

TrainState TrainState::initial(const TrainConfig& config) {
  TrainState st;
  st.params = NetworkParameters::initialize(config.seed);
  st.adam = AdamState::for_parameters(st.params);
  st.adam.learning_rate = config.learning_rate;
  return st;
}

EpochRecord evaluate_epoch(const NetworkParameters& params, int epoch, std::span<const SectorData> sectors,
                           const FitOptions& fit, std::span<const SectorData> validation) {
  const auto passes = evaluate_all(params, sectors, fit, epoch);
  EpochRecord rec = summarize(epoch, passes, sectors);
  if (!validation.empty()) rec.validation = pooled_metrics(evaluate_all(params, validation, fit, epoch), validation);
  return rec;
}

EpochRecord train_epoch(TrainState& state, std::span<const SectorData> sectors, const TrainConfig& config,
                        std::span<const SectorData> validation) {
  const int epoch = state.epoch;
  const auto passes = evaluate_all(state.params, sectors, config.fit, epoch);
  EpochRecord rec = summarize(epoch, passes, sectors);
  if (!validation.empty())
    rec.validation = pooled_metrics(evaluate_all(state.params, validation, config.fit, epoch), validation);

  // Every (sector, row) pair; clustering targets fixed at the fitted centers.
  std::vector<std::pair<std::size_t, std::size_t>> order;
  for (std::size_t s = 0; s < sectors.size(); ++s)
    for (std::size_t j = 0; j < sectors[s].size(); ++j) order.emplace_back(s, j);
  const std::size_t total = order.size();
  std::size_t active = 0;
  for (const auto& s : sectors) active += s.size() > 0 ? 1 : 0;
  if (total > 0) {
    std::size_t batch = config.batch_size == 0 ? total : std::min(config.batch_size, total);
    if (config.batch_size > 0) {
      std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(epoch))));
      std::shuffle(order.begin(), order.end(), rng);
    }
    const std::size_t width = sectors.front().features.values.cols();
    for (std::size_t start = 0; start < total; start += batch) {
      const std::size_t b = std::min(batch, total - start);
      // The epoch losses are means over sectors; a batch of b pixels stands in
      // for all `total` of them.
      const double scale = static_cast<double>(total) / (static_cast<double>(b) * static_cast<double>(active));
      Matrix x(b, width);
      JointTargets t;
      t.row_scale.resize(b);
      for (std::size_t i = 0; i < 3; ++i) {
        t.center[i].resize(b);
        t.weight[i].resize(b);
      }
      for (std::size_t r = 0; r < b; ++r) {
        const auto [s, j] = order[start + r];
        const auto& sec = sectors[s];
        for (std::size_t f = 0; f < width; ++f) x(r, f) = sec.features.values(j, f);
        t.row_scale[r] = scale / static_cast<double>(sec.size());
        for (std::size_t i = 0; i < 3; ++i) {
          const auto h = static_cast<std::size_t>(passes[s].losses[i].targets[j]);
          t.center[i][r] = passes[s].states[i].centers[h];
          t.weight[i][r] = scale * passes[s].weights[i][h];
        }
      }
      const JointLoss jl = joint_loss(state.params, x, t);
      adam_step(state.params, jl.gradient, state.adam);
    }
  }
  ++state.epoch;
  return rec;
}

std::size_t select_model(std::span<const EpochRecord> records) {
  if (records.empty()) throw std::invalid_argument("select_model: no epoch records");
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].clustering < records[best].clustering) best = i;
  return best;
}

namespace {

TrainResult train_once(const TrainConfig& config, std::span<const SectorData> sectors,
                       std::span<const SectorData> validation) {
  TrainState state = TrainState::initial(config);
  TrainResult result;
  Checkpoint best{state.params, state.adam, 0};
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 0;

  for (int e = 0; e < config.epochs; ++e) {
    Checkpoint snapshot{state.params, state.adam, state.epoch};
    EpochRecord rec = train_epoch(state, sectors, config, validation);
    if (rec.clustering < best_loss) {
      best_loss = rec.clustering;
      best = std::move(snapshot);
      best_epoch = rec.epoch;
    }
    result.records.push_back(std::move(rec));
    if (config.convergence_window > 0 && e - best_epoch >= config.convergence_window) break;
  }
  EpochRecord last = evaluate_epoch(state.params, state.epoch, sectors, config.fit, validation);
  if (last.clustering < best_loss) best = Checkpoint{state.params, state.adam, state.epoch};
  result.records.push_back(std::move(last));

  result.selected = select_model(result.records);
  result.best = std::move(best);
  result.final = Checkpoint{state.params, state.adam, state.epoch};
  return result;
}

}  // namespace

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  return restart == 0 ? seed : splitmix64(seed ^ splitmix64(0x5eed0000ULL + static_cast<std::uint64_t>(restart)));
}

TrainResult train(const TrainConfig& config, std::span<const SectorData> sectors,
                  std::span<const SectorData> validation) {
  config.validate();
  TrainResult result;
  for (int r = 0; r < config.restarts; ++r) {
    TrainConfig run = config;
    run.seed = restart_seed(config.seed, r);
    TrainResult candidate = train_once(run, sectors, validation);
    candidate.restart = r;
    if (r == 0 || candidate.records[candidate.selected].clustering < result.records[result.selected].clustering)
      result = std::move(candidate);
  }
  if (!config.loss_curve.empty()) csv::write_file(config.loss_curve, write_loss_curve(result.records));
  return result;
}

std::string write_loss_curve(std::span<const EpochRecord> records) {
  std::vector<std::string> header = {"epoch", "reconstruction", "clustering", "total"};
  for (const char* group : {"precision", "val_precision"})
    for (Indicator ind : kLatentIndicators) header.push_back(std::string(group) + "_" + std::string(to_string(ind)));
  csv::Writer w(header);
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  for (const auto& r : records) {
    std::vector<std::string> row = {std::to_string(r.epoch), csv::format_double(r.reconstruction),
                                    csv::format_double(r.clustering), csv::format_double(r.total)};
    for (const auto& m : r.train) row.push_back(opt(m.precision));
    for (const auto& m : r.validation) row.push_back(opt(m.precision));
    w.row(row);
  }
  return w.str();
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int fold_count, std::uint64_t seed) {
  if (fold_count < 2) throw ValidationError("fold_count must be at least 2");
  const auto f = static_cast<std::size_t>(fold_count);
  if (n < f)
    throw ValidationError("cross-validation needs at least " + std::to_string(f) + " sectors with groundtruth, got " +
                          std::to_string(n));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(splitmix64(seed));
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<std::vector<std::size_t>> folds(f);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < f; ++i) {
    const std::size_t size = n / f + (i < n % f ? 1 : 0);
    folds[i].assign(idx.begin() + static_cast<std::ptrdiff_t>(pos), idx.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[i].begin(), folds[i].end());
    pos += size;
  }
  return folds;
}

std::array<std::optional<double>, 3> sector_precision(const NetworkParameters& params, const SectorData& sector,
                                                      const FitOptions& fit_options) {
  std::array<std::optional<double>, 3> out;
  if (sector.size() == 0) return out;
  const auto sp = evaluate_sector(params, sector, fit_options);
  for (std::size_t i = 0; i < 3; ++i) out[i] = modified_precision(sp.states[i].labels, sector.overlays[i]);
  return out;
}

CrossValidationReport cross_validate(const TrainConfig& config, std::span<const SectorData> sectors) {
  config.validate();
  const auto with_gt = static_cast<std::size_t>(
      std::count_if(sectors.begin(), sectors.end(), [](const auto& s) { return s.has_groundtruth(); }));
  if (with_gt < static_cast<std::size_t>(config.fold_count))
    throw ValidationError("cross-validation needs at least " + std::to_string(config.fold_count) +
                          " sectors with groundtruth, got " + std::to_string(with_gt));
  const auto folds = make_folds(sectors.size(), config.fold_count, config.seed);

  TrainConfig fold_config = config;
  fold_config.loss_curve.clear();
  CrossValidationReport report;
  std::array<std::vector<double>, 3> train_means, held_means;
  for (const auto& fold : folds) {
    std::vector<SectorData> training, held;
    for (std::size_t s = 0; s < sectors.size(); ++s) {
      if (std::binary_search(fold.begin(), fold.end(), s)) held.push_back(sectors[s]);
      else training.push_back(sectors[s]);
    }
    const TrainResult tr = train(fold_config, training, held);
    FoldReport fr;
    for (const auto& h : held) fr.held_out.push_back(h.sector_id());
    fr.selected_epoch = static_cast<std::size_t>(tr.records[tr.selected].epoch);

    std::array<std::vector<double>, 3> tp, hp;
    for (const auto& s : training) {
      const auto p = sector_precision(tr.best.params, s, config.fit);
      for (std::size_t i = 0; i < 3; ++i)
        if (p[i]) tp[i].push_back(*p[i]);
    }
    for (const auto& s : held) {
      const auto p = sector_precision(tr.best.params, s, config.fit);
      for (std::size_t i = 0; i < 3; ++i)
        if (p[i]) hp[i].push_back(*p[i]);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      fr.train_precision[i] = mean_of(tp[i]);
      fr.held_out_precision[i] = mean_of(hp[i]);
      if (fr.train_precision[i]) train_means[i].push_back(*fr.train_precision[i]);
      if (fr.held_out_precision[i]) held_means[i].push_back(*fr.held_out_precision[i]);
    }
    report.folds.push_back(std::move(fr));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    report.train_mean[i] = mean_of(train_means[i]);
    report.held_out_mean[i] = mean_of(held_means[i]);
  }
  return report;
}

std::string write_cross_validation(const CrossValidationReport& report) {
  std::vector<std::string> header = {"fold", "held_out", "selected_epoch"};
  for (const char* group : {"train", "held_out"})
    for (Indicator ind : kLatentIndicators) header.push_back(std::string(group) + "_" + std::string(to_string(ind)));
  csv::Writer w(header);
  auto opt = [](const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); };
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    const auto& fr = report.folds[f];
    std::string ids;
    for (const auto& id : fr.held_out) ids += (ids.empty() ? "" : ";") + id;
    std::vector<std::string> row = {std::to_string(f), ids, std::to_string(fr.selected_epoch)};
    for (const auto& p : fr.train_precision) row.push_back(opt(p));
    for (const auto& p : fr.held_out_precision) row.push_back(opt(p));
    w.row(row);
  }
  std::vector<std::string> row = {"mean", "", ""};
  for (const auto& p : report.train_mean) row.push_back(opt(p));
  for (const auto& p : report.held_out_mean) row.push_back(opt(p));
  w.row(row);
  return w.str();
}

}  // namespace ccc
