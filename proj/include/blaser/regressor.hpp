#pragma once

// Supervised quality regressor over feature vectors (see features.hpp):
//
//   y = w_out . act(W2 act(W1 f + b1) + b2) + b_out,   act = tanh
//
// trained with MSE against standardized median ratings, Adam, and a learning
// rate annealed linearly to zero. Parameters live in double precision and are
// serialized as f32.
//
// Model file layout (little-endian):
//   "BLSM" | u16 version=1 | u32 d_in | u32 h1 | u32 h2 | f64 rating_mean |
//   f64 rating_std | u8 activation (0 = tanh) |
//   W1 (h1 x d_in) | b1 (h1) | W2 (h2 x h1) | b2 (h2) | w_out (h2) | b_out
// with every matrix row-major f32.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "blaser/embedding_store.hpp"
#include "blaser/features.hpp"

namespace blaser {

enum class Activation : std::uint8_t { kTanh = 0 };

// --- rating handling -------------------------------------------------------

// Median; even counts average the two middle values. Throws on empty input.
double aggregate_ratings(std::span<const double> ratings);

struct Standardizer {
  double mean = 0.0;
  double std = 1.0;
};

// Population mean and standard deviation. Throws DegenerateInput for fewer
// than two ratings or zero variance.
Standardizer fit_standardizer(std::span<const double> ratings);

// Throw Error when std <= 0.
double standardize(double r, double mean, double std);
double destandardize(double z, double mean, double std);

// --- model -----------------------------------------------------------------

struct RegressorModel {
  Eigen::MatrixXd w1;     // h1 x d_in
  Eigen::VectorXd b1;     // h1
  Eigen::MatrixXd w2;     // h2 x h1
  Eigen::VectorXd b2;     // h2
  Eigen::VectorXd w_out;  // h2
  double b_out = 0.0;
  double rating_mean = 0.0;
  double rating_std = 1.0;
  std::uint64_t seed = 0;  // not serialized
  Activation activation = Activation::kTanh;

  std::size_t d_in() const noexcept { return static_cast<std::size_t>(w1.cols()); }
  std::size_t h1() const noexcept { return static_cast<std::size_t>(w1.rows()); }
  std::size_t h2() const noexcept { return static_cast<std::size_t>(w2.rows()); }
  std::size_t parameter_count() const noexcept;

  // Throws Error when shapes disagree, a parameter is non-finite, or
  // rating_std <= 0.
  void validate() const;
};

// Biases zero; weights uniform in +-sqrt(6 / (fan_in + fan_out)) per layer,
// drawn from a seeded engine. d is the embedding dimension (d_in = 6d).
RegressorModel init_model(std::size_t d, std::size_t h1, std::size_t h2, std::uint64_t seed);

double forward(const RegressorModel& m, std::span<const double> features);
double forward(const RegressorModel& m, const FeatureVector& f);

// Forward pass over the columns of `features` (d_in x n).
Eigen::VectorXd predict(const RegressorModel& m, const Eigen::MatrixXd& features);

struct Gradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  Eigen::VectorXd w_out;
  double b_out = 0.0;
};

// Exact gradient of (forward(m, f) - target)^2 with respect to every parameter.
Gradients gradients(const RegressorModel& m, std::span<const double> features, double target);

// Mean squared error over the columns of `features` and, when `grad` is
// non-null, its exact gradient.
double batch_loss(const RegressorModel& m, const Eigen::MatrixXd& features,
                  const Eigen::VectorXd& targets, Gradients* grad);

std::vector<std::byte> encode_model(const RegressorModel& m);
RegressorModel decode_model(std::span<const std::byte> bytes);
void save_model(const RegressorModel& m, const std::filesystem::path& path);
RegressorModel load_model(const std::filesystem::path& path);

// --- training --------------------------------------------------------------

enum class LrSchedule : std::uint8_t { kLinearAnnealToZero };

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int epochs = 20;
  double lr0 = 5e-5;
  LrSchedule schedule = LrSchedule::kLinearAnnealToZero;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  bool shuffle = true;
  std::size_t hidden1 = 3072;
  std::size_t hidden2 = 1536;
  AdamParams adam;

  void validate() const;
};

// Rate for 0-based step `step` of `total_steps`: lr0 * (1 - step / total).
double learning_rate(double lr0, std::size_t step, std::size_t total_steps);

struct TrainReport {
  std::vector<double> epoch_mse;  // running mean over each epoch, standardized space
  double final_mse = 0.0;         // final model on the whole train split
  double seconds = 0.0;

  friend bool operator==(const TrainReport&, const TrainReport&) = default;
};

struct TrainResult {
  RegressorModel model;
  TrainReport report;
};

using EpochCallback = std::function<void(int epoch, double mse)>;

// Trains on the instances with split == train. Each target is the
// standardized median rating. Throws on an empty train split, a split
// smaller than batch_size, instances without ratings, or degenerate ratings.
TrainResult train(const Dataset& ds, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// 6d x n feature matrix, one column per instance.
Eigen::MatrixXd feature_matrix(const Dataset& ds);

// Standardized-space predictions in dataset order. Throws DimensionError if
// the model's input width is not 6 * ds.dim().
std::vector<std::pair<std::string, double>> score_dataset_s(const RegressorModel& m, const Dataset& ds);

// Maps a standardized prediction back onto the rating scale.
double to_rating_scale(const RegressorModel& m, double z);

}  // namespace blaser
