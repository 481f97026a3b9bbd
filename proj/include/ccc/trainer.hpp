#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccc/autoencoder.hpp"
#include "ccc/census.hpp"
#include "ccc/constrained_kmeans.hpp"
#include "ccc/features.hpp"
#include "ccc/metrics.hpp"

namespace ccc {

// Everything training needs for one sector. Overlays may be entirely
// uncovered for sectors without groundtruth.
struct SectorData {
  FeatureMatrix features;
  std::array<ClusterSpec, 3> specs;  // roof, wall, height
  std::array<GroundtruthOverlay, 3> overlays;

  const std::string& sector_id() const { return features.sector_id; }
  std::size_t size() const { return features.size(); }
  bool has_groundtruth() const;
};

SectorData make_sector_data(FeatureMatrix features, const std::vector<ConstraintSet>& constraints,
                            const std::vector<GroundtruthRecord>* groundtruth = nullptr,
                            const LabelMapping* mapping = nullptr);

struct TrainConfig {
  int epochs = 200;
  std::uint64_t seed = 0;
  int fold_count = 5;
  // Pixels per Adam step, drawn from a seeded shuffle of all training
  // pixels; 0 takes one full-batch step per epoch.
  std::size_t batch_size = 64;
  double learning_rate = 1e-4;
  // Stop once the clustering loss has not improved for this many epochs;
  // 0 always runs every epoch.
  int convergence_window = 0;
  // Independent initializations; the run whose selected epoch has the lowest
  // clustering loss is kept (earliest run on ties). Restart 0 uses `seed`.
  int restarts = 1;
  FitOptions fit;
  std::filesystem::path loss_curve;

  void validate() const;
};

struct IndicatorMetrics {
  std::size_t covered = 0;
  std::size_t true_positives = 0;
  std::optional<double> precision;  // pooled over sectors
};

struct EpochRecord {
  int epoch = 0;
  double reconstruction = 0.0;  // mean over sectors
  double clustering = 0.0;      // mean over sectors, summed over indicators
  double total = 0.0;
  std::array<IndicatorMetrics, 3> train;
  std::array<IndicatorMetrics, 3> validation;
};

// Per-pixel clustering targets held fixed during backpropagation.
struct JointTargets {
  std::vector<double> row_scale;                 // multiplies each row's squared reconstruction error
  std::array<std::vector<double>, 3> center;     // target center per pixel and channel
  std::array<std::vector<double>, 3> weight;     // label weight per pixel and channel
};

struct JointLoss {
  double reconstruction = 0.0;
  double clustering = 0.0;
  NetworkParameters gradient;
};

// sum_j row_scale_j |x_hat_j - x_j|^2 + sum_j sum_i weight_ij |z_ij - center_ij|
// and its gradient with respect to every parameter.
JointLoss joint_loss(const NetworkParameters& params, const Matrix& x, const JointTargets& targets);

// Encode a sector and fit every indicator at fixed parameters.
struct SectorPass {
  ForwardPass pass;
  std::array<AssignmentState, 3> states;
  std::array<std::vector<double>, 3> weights;
  std::array<ClusteringLoss, 3> losses;
  double reconstruction = 0.0;
  double clustering = 0.0;
};

SectorPass evaluate_sector(const NetworkParameters& params, const SectorData& sector, const FitOptions& fit);

struct TrainState {
  NetworkParameters params;
  AdamState adam;
  int epoch = 0;

  static TrainState initial(const TrainConfig& config);
};

// Records the losses at the current parameters, then updates them. Throws
// NumericalError naming the epoch, sector and term on a non-finite loss.
EpochRecord train_epoch(TrainState& state, std::span<const SectorData> sectors, const TrainConfig& config,
                        std::span<const SectorData> validation = {});

// Evaluation only; no parameter update.
EpochRecord evaluate_epoch(const NetworkParameters& params, int epoch, std::span<const SectorData> sectors,
                           const FitOptions& fit, std::span<const SectorData> validation = {});

// Index of the record with the lowest clustering loss; earliest on ties.
std::size_t select_model(std::span<const EpochRecord> records);

struct TrainResult {
  std::vector<EpochRecord> records;  // one per epoch plus a final evaluation
  std::size_t selected = 0;
  int restart = 0;  // which restart produced these records
  Checkpoint best;
  Checkpoint final;
};

// Seed used by restart r; restart 0 keeps the configured seed.
std::uint64_t restart_seed(std::uint64_t seed, int restart);

TrainResult train(const TrainConfig& config, std::span<const SectorData> sectors,
                  std::span<const SectorData> validation = {});

// losses.csv
std::string write_loss_curve(std::span<const EpochRecord> records);

// Near-equal folds over a seeded shuffle of [0, n). Throws ValidationError
// when n < fold_count.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int fold_count, std::uint64_t seed);

struct FoldReport {
  std::vector<std::string> held_out;
  std::size_t selected_epoch = 0;
  std::array<std::optional<double>, 3> train_precision;     // mean over training sectors
  std::array<std::optional<double>, 3> held_out_precision;  // mean over held-out sectors
};

struct CrossValidationReport {
  std::vector<FoldReport> folds;
  std::array<std::optional<double>, 3> train_mean;
  std::array<std::optional<double>, 3> held_out_mean;
};

CrossValidationReport cross_validate(const TrainConfig& config, std::span<const SectorData> sectors);
std::string write_cross_validation(const CrossValidationReport& report);

// Per-sector precision per indicator at fixed parameters.
std::array<std::optional<double>, 3> sector_precision(const NetworkParameters& params, const SectorData& sector,
                                                      const FitOptions& fit);

}  // namespace ccc
