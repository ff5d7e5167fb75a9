#include "blaser/regressor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "blaser/error.hpp"
#include "blaser/rng.hpp"
#include "byte_io.hpp"

namespace blaser {

// --- rating handling -------------------------------------------------------

double aggregate_ratings(std::span<const double> ratings) {
  if (ratings.empty()) throw Error("aggregate_ratings: empty rating list");
  std::vector<double> v(ratings.begin(), ratings.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

Standardizer fit_standardizer(std::span<const double> ratings) {
  if (ratings.size() < 2) {
    throw DegenerateInput("fit_standardizer: need at least 2 ratings, got " +
                          std::to_string(ratings.size()));
  }
  const double n = static_cast<double>(ratings.size());
  const double mean = std::accumulate(ratings.begin(), ratings.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : ratings) ss += (r - mean) * (r - mean);
  const double std = std::sqrt(ss / n);
  if (!std::isfinite(mean) || !std::isfinite(std) || std <= 0.0) {
    throw DegenerateInput("fit_standardizer: ratings have zero variance");
  }
  return {mean, std};
}

double standardize(double r, double mean, double std) {
  if (!(std > 0.0)) throw Error("standardize: std must be positive");
  return (r - mean) / std;
}

double destandardize(double z, double mean, double std) {
  if (!(std > 0.0)) throw Error("destandardize: std must be positive");
  return z * std + mean;
}

// --- model -----------------------------------------------------------------

namespace {

constexpr std::string_view kModelMagic = "BLSM";
constexpr std::uint16_t kModelVersion = 1;

Eigen::MatrixXd act(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double x) { return std::tanh(x); });
}

// d act / dz expressed through a = act(z).
Eigen::MatrixXd act_grad(const Eigen::MatrixXd& a) {
  return (1.0 - a.array().square()).matrix();
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

void check_input(const RegressorModel& m, std::size_t rows) {
  if (rows != m.d_in()) {
    throw DimensionError("regressor: feature length " + std::to_string(rows) + ", model expects " +
                         std::to_string(m.d_in()));
  }
}

}  // namespace

std::size_t RegressorModel::parameter_count() const noexcept {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size() + w_out.size() + 1);
}

void RegressorModel::validate() const {
  if (w1.rows() == 0 || w1.cols() == 0 || w2.rows() == 0) throw Error("regressor: empty layer");
  if (b1.size() != w1.rows() || w2.cols() != w1.rows() || b2.size() != w2.rows() ||
      w_out.size() != w2.rows()) {
    throw Error("regressor: inconsistent parameter shapes");
  }
  if (!all_finite(w1) || !all_finite(b1) || !all_finite(w2) || !all_finite(b2) ||
      !all_finite(w_out) || !std::isfinite(b_out)) {
    throw Error("regressor: non-finite parameter");
  }
  if (!std::isfinite(rating_mean) || !std::isfinite(rating_std) || !(rating_std > 0.0)) {
    throw Error("regressor: invalid rating standardizer");
  }
}

RegressorModel init_model(std::size_t d, std::size_t h1, std::size_t h2, std::uint64_t seed) {
  if (d == 0 || h1 == 0 || h2 == 0) throw Error("init_model: sizes must be positive");
  const std::size_t d_in = kFeatureBlocks * d;
  Engine eng = make_engine(seed);
  auto glorot = [&](Eigen::Index rows, Eigen::Index cols, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Eigen::MatrixXd w(rows, cols);
    // Row-major draw order, matching the serialized layout.
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = uniform(eng, -limit, limit);
    return w;
  };
  RegressorModel m;
  m.w1 = glorot(h1, d_in, d_in, h1);
  m.b1 = Eigen::VectorXd::Zero(h1);
  m.w2 = glorot(h2, h1, h1, h2);
  m.b2 = Eigen::VectorXd::Zero(h2);
  m.w_out = glorot(h2, 1, h2, 1).col(0);
  m.b_out = 0.0;
  m.seed = seed;
  return m;
}

Eigen::VectorXd predict(const RegressorModel& m, const Eigen::MatrixXd& features) {
  check_input(m, static_cast<std::size_t>(features.rows()));
  const Eigen::MatrixXd a1 = act((m.w1 * features).colwise() + m.b1);
  const Eigen::MatrixXd a2 = act((m.w2 * a1).colwise() + m.b2);
  Eigen::VectorXd y = (a2.transpose() * m.w_out).array() + m.b_out;
  if (!y.allFinite()) throw Error("regressor: non-finite prediction");
  return y;
}

double forward(const RegressorModel& m, std::span<const double> features) {
  check_input(m, features.size());
  const Eigen::Map<const Eigen::MatrixXd> x(features.data(), static_cast<Eigen::Index>(features.size()), 1);
  return predict(m, x)(0);
}

double forward(const RegressorModel& m, const FeatureVector& f) { return forward(m, f.values); }

double batch_loss(const RegressorModel& m, const Eigen::MatrixXd& features,
                  const Eigen::VectorXd& targets, Gradients* grad) {
  check_input(m, static_cast<std::size_t>(features.rows()));
  if (targets.size() != features.cols() || features.cols() == 0) {
    throw DimensionError("batch_loss: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(features.cols()) + " inputs");
  }
  const double inv_n = 1.0 / static_cast<double>(features.cols());
  const Eigen::MatrixXd a1 = act((m.w1 * features).colwise() + m.b1);
  const Eigen::MatrixXd a2 = act((m.w2 * a1).colwise() + m.b2);
  const Eigen::VectorXd residual = ((a2.transpose() * m.w_out).array() + m.b_out).matrix() - targets;
  const double loss = residual.squaredNorm() * inv_n;
  if (!std::isfinite(loss)) throw Error("regressor: non-finite loss");
  if (grad == nullptr) return loss;

  const Eigen::RowVectorXd dy = (2.0 * inv_n) * residual.transpose();
  grad->w_out.noalias() = a2 * dy.transpose();
  grad->b_out = dy.sum();
  const Eigen::MatrixXd d2 = (m.w_out * dy).cwiseProduct(act_grad(a2));
  grad->w2.noalias() = d2 * a1.transpose();
  grad->b2 = d2.rowwise().sum();
  const Eigen::MatrixXd d1 = (m.w2.transpose() * d2).cwiseProduct(act_grad(a1));
  grad->w1.noalias() = d1 * features.transpose();
  grad->b1 = d1.rowwise().sum();
  return loss;
}

Gradients gradients(const RegressorModel& m, std::span<const double> features, double target) {
  check_input(m, features.size());
  if (!std::isfinite(target)) throw Error("gradients: non-finite target");
  const Eigen::MatrixXd x =
      Eigen::Map<const Eigen::MatrixXd>(features.data(), static_cast<Eigen::Index>(features.size()), 1);
  Eigen::VectorXd y(1);
  y(0) = target;
  Gradients g;
  batch_loss(m, x, y, &g);
  return g;
}

// --- serialization ---------------------------------------------------------

namespace {

void put_matrix(detail::ByteWriter& w, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.f32(static_cast<float>(m(i, j)));
}

Eigen::MatrixXd get_matrix(detail::ByteReader& r, Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = r.f32();
  return m;
}

}  // namespace

std::vector<std::byte> encode_model(const RegressorModel& m) {
  m.validate();
  detail::ByteWriter w;
  w.reserve(64 + 4 * m.parameter_count());
  w.magic(kModelMagic);
  w.u16(kModelVersion);
  w.u32(static_cast<std::uint32_t>(m.d_in()));
  w.u32(static_cast<std::uint32_t>(m.h1()));
  w.u32(static_cast<std::uint32_t>(m.h2()));
  w.f64(m.rating_mean);
  w.f64(m.rating_std);
  w.u8(static_cast<std::uint8_t>(m.activation));
  put_matrix(w, m.w1);
  put_matrix(w, m.b1);
  put_matrix(w, m.w2);
  put_matrix(w, m.b2);
  put_matrix(w, m.w_out);
  w.f32(static_cast<float>(m.b_out));
  return std::move(w.bytes());
}

RegressorModel decode_model(std::span<const std::byte> bytes) {
  detail::ByteReader r(bytes, "model file");
  r.expect_magic(kModelMagic);
  const std::uint16_t version = r.u16();
  if (version != kModelVersion) {
    throw FormatError(FormatError::Kind::kUnsupportedVersion,
                      "model file: unsupported version " + std::to_string(version));
  }
  const std::uint32_t d_in = r.u32(), h1 = r.u32(), h2 = r.u32();
  if (d_in == 0 || d_in % kFeatureBlocks != 0 || h1 == 0 || h2 == 0) {
    throw FormatError(FormatError::Kind::kCorrupt, "model file: invalid layer sizes");
  }
  RegressorModel m;
  m.rating_mean = r.f64();
  m.rating_std = r.f64();
  const std::uint8_t act_code = r.u8();
  if (act_code != static_cast<std::uint8_t>(Activation::kTanh)) {
    throw FormatError(FormatError::Kind::kCorrupt,
                      "model file: unknown activation code " + std::to_string(act_code));
  }
  const std::uint64_t floats = std::uint64_t{h1} * d_in + h1 + std::uint64_t{h2} * h1 + 2 * std::uint64_t{h2} + 1;
  r.require(floats * 4);
  m.w1 = get_matrix(r, h1, d_in);
  m.b1 = get_matrix(r, h1, 1).col(0);
  m.w2 = get_matrix(r, h2, h1);
  m.b2 = get_matrix(r, h2, 1).col(0);
  m.w_out = get_matrix(r, h2, 1).col(0);
  m.b_out = r.f32();
  if (r.remaining() != 0) {
    throw FormatError(FormatError::Kind::kCorrupt,
                      "model file: " + std::to_string(r.remaining()) + " trailing bytes");
  }
  try {
    m.validate();
  } catch (const Error& e) {
    throw FormatError(FormatError::Kind::kCorrupt, std::string("model file: ") + e.what());
  }
  return m;
}

void save_model(const RegressorModel& m, const std::filesystem::path& path) {
  detail::write_file(path, encode_model(m));
}

RegressorModel load_model(const std::filesystem::path& path) {
  return decode_model(detail::read_file(path));
}

// --- training --------------------------------------------------------------

void TrainConfig::validate() const {
  if (epochs < 1) throw Error("train: epochs must be >= 1");
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) throw Error("train: lr0 must be positive");
  if (batch_size < 1) throw Error("train: batch_size must be >= 1");
  if (hidden1 < 1 || hidden2 < 1) throw Error("train: hidden sizes must be >= 1");
}

double learning_rate(double lr0, std::size_t step, std::size_t total_steps) {
  if (total_steps == 0 || step >= total_steps) {
    throw Error("learning_rate: step " + std::to_string(step) + " outside [0, " +
                std::to_string(total_steps) + ")");
  }
  return lr0 * (1.0 - static_cast<double>(step) / static_cast<double>(total_steps));
}

Eigen::MatrixXd feature_matrix(const Dataset& ds) {
  const std::size_t d_in = kFeatureBlocks * ds.dim();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d_in), static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const TripleView t = ds.triple(i);
    build_features_into(t.src, t.mt, t.ref,
                        std::span<double>(x.col(static_cast<Eigen::Index>(i)).data(), d_in));
  }
  return x;
}

namespace {

class Adam {
 public:
  Adam(const RegressorModel& m, AdamParams p) : p_(p) {
    m_.w1 = Eigen::MatrixXd::Zero(m.w1.rows(), m.w1.cols());
    m_.b1 = Eigen::VectorXd::Zero(m.b1.size());
    m_.w2 = Eigen::MatrixXd::Zero(m.w2.rows(), m.w2.cols());
    m_.b2 = Eigen::VectorXd::Zero(m.b2.size());
    m_.w_out = Eigen::VectorXd::Zero(m.w_out.size());
    v_ = m_;
  }

  void step(RegressorModel& model, const Gradients& g, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(p_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(p_.beta2, static_cast<double>(t_));
    update(model.w1, m_.w1, v_.w1, g.w1, lr, c1, c2);
    update(model.b1, m_.b1, v_.b1, g.b1, lr, c1, c2);
    update(model.w2, m_.w2, v_.w2, g.w2, lr, c1, c2);
    update(model.b2, m_.b2, v_.b2, g.b2, lr, c1, c2);
    update(model.w_out, m_.w_out, v_.w_out, g.w_out, lr, c1, c2);
    m_.b_out = p_.beta1 * m_.b_out + (1.0 - p_.beta1) * g.b_out;
    v_.b_out = p_.beta2 * v_.b_out + (1.0 - p_.beta2) * g.b_out * g.b_out;
    model.b_out -= lr * (m_.b_out / c1) / (std::sqrt(v_.b_out / c2) + p_.eps);
  }

 private:
  template <typename P>
  void update(P& param, P& m, P& v, const P& g, double lr, double c1, double c2) const {
    m.array() = p_.beta1 * m.array() + (1.0 - p_.beta1) * g.array();
    v.array() = p_.beta2 * v.array() + (1.0 - p_.beta2) * g.array().square();
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + p_.eps);
  }

  AdamParams p_;
  Gradients m_;
  Gradients v_;
  std::uint64_t t_ = 0;
};

}  // namespace

TrainResult train(const Dataset& ds, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();
  const Dataset tr = filter_by_split(ds, Split::kTrain);
  if (tr.empty()) throw Error("train: dataset has no train-split instances");
  if (tr.size() < cfg.batch_size) {
    throw Error("train: train split has " + std::to_string(tr.size()) +
                " instances, fewer than batch_size " + std::to_string(cfg.batch_size));
  }

  std::vector<double> medians;
  medians.reserve(tr.size());
  for (const auto& inst : tr.instances()) {
    if (inst.ratings.empty()) throw ValidationError(inst.id, "train instance has no ratings");
    medians.push_back(aggregate_ratings(inst.ratings));
  }
  const Standardizer st = fit_standardizer(medians);
  Eigen::VectorXd targets(static_cast<Eigen::Index>(medians.size()));
  for (std::size_t i = 0; i < medians.size(); ++i) {
    targets(static_cast<Eigen::Index>(i)) = standardize(medians[i], st.mean, st.std);
  }

  const Eigen::MatrixXd x = feature_matrix(tr);
  TrainResult out;
  RegressorModel& model = out.model;
  model = init_model(tr.dim(), cfg.hidden1, cfg.hidden2, cfg.seed);
  model.rating_mean = st.mean;
  model.rating_std = st.std;

  const std::size_t n = tr.size();
  const std::size_t steps_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(cfg.epochs);
  Engine eng = make_engine(cfg.seed, /*stream=*/1);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Adam adam(model, cfg.adam);
  Gradients grad;
  Eigen::MatrixXd xb;
  Eigen::VectorXd yb;
  std::size_t step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) shuffle(order.begin(), order.end(), eng);
    double sse = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, n - start);
      xb.resize(x.rows(), static_cast<Eigen::Index>(b));
      yb.resize(static_cast<Eigen::Index>(b));
      for (std::size_t k = 0; k < b; ++k) {
        xb.col(static_cast<Eigen::Index>(k)) = x.col(order[start + k]);
        yb(static_cast<Eigen::Index>(k)) = targets(order[start + k]);
      }
      sse += batch_loss(model, xb, yb, &grad) * static_cast<double>(b);
      adam.step(model, grad, learning_rate(cfg.lr0, step, total_steps));
      ++step;
    }
    out.report.epoch_mse.push_back(sse / static_cast<double>(n));
    if (on_epoch) on_epoch(epoch + 1, out.report.epoch_mse.back());
  }

  out.report.final_mse = batch_loss(model, x, targets, nullptr);
  model.validate();
  out.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

std::vector<std::pair<std::string, double>> score_dataset_s(const RegressorModel& m, const Dataset& ds) {
  std::vector<std::pair<std::string, double>> out;
  if (ds.empty()) return out;
  if (m.d_in() != kFeatureBlocks * ds.dim()) {
    throw DimensionError("score_dataset_s: model expects d_in " + std::to_string(m.d_in()) +
                         ", dataset dim " + std::to_string(ds.dim()) + " gives " +
                         std::to_string(kFeatureBlocks * ds.dim()));
  }
  const Eigen::VectorXd y = predict(m, feature_matrix(ds));
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out.emplace_back(ds.instances()[i].id, y(static_cast<Eigen::Index>(i)));
  }
  return out;
}

double to_rating_scale(const RegressorModel& m, double z) {
  return destandardize(z, m.rating_mean, m.rating_std);
}

}  // namespace blaser
