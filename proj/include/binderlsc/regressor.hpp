#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace binderlsc {

class Rng;

enum class ModelKind { Linear, Mlp };

std::string to_string(ModelKind kind);
// Accepts "lt"/"linear" and "mlp" (case-insensitive).
ModelKind parse_model_kind(const std::string& name);

inline constexpr double kOutputScale = 6.0;

// Optimizer and schedule. Defaults reproduce the reference recipe
// (batch 16, lr 1e-3, 100 epochs) with Adam as the optimizer.
struct TrainConfig {
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::size_t epochs = 100;
  std::uint64_t seed = 20240601;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<std::size_t> hidden = {300, 200, 100, 50};  // MLP only

  // Throws Error(Validation) on batch_size/epochs == 0 or lr <= 0.
  void validate() const;
  // One-line description recorded in reports and checkpoints.
  std::string describe() const;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

// Paired inputs (encoder space) and Binder targets, one row per word.
struct TrainingSet {
  Eigen::MatrixXd inputs;   // n x input_dim
  Eigen::MatrixXd targets;  // n x output_dim
  std::vector<std::string> words;

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
  TrainingSet subset(const std::vector<std::size_t>& rows) const;
};

// Gradient of the loss with respect to every layer's parameters.
struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

// Map from encoder space to Binder space: ReLU hidden layers (none for the
// linear transform) followed by an affine output layer squashed by 6*sigmoid.
class RegressionModel {
 public:
  // Kaiming-uniform for ReLU layers, Xavier-uniform for the output layer,
  // zero biases.
  static RegressionModel initialize(ModelKind kind, std::size_t input_dim, std::size_t output_dim,
                                    const std::vector<std::size_t>& hidden, Rng& rng);
  // Takes explicit parameters; checks that the shapes chain.
  RegressionModel(ModelKind kind, std::vector<DenseLayer> layers);

  ModelKind kind() const { return kind_; }
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::vector<std::size_t> hidden_widths() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }
  std::size_t parameter_count() const;

  // Outputs lie strictly inside (0, 6). Throws Error(Shape) on a length
  // mismatch and Error(Data) on non-finite input.
  Eigen::VectorXd predict(const Eigen::VectorXd& x) const;
  // Row-wise predict for an n x input_dim matrix.
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& x) const;

  // Mean squared error over all rows and outputs, and its gradient.
  double loss_and_gradients(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                            Gradients& grads) const;
  double loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const;

 private:
  ModelKind kind_;
  std::vector<DenseLayer> layers_;
};

struct TrainResult {
  RegressionModel model;
  std::vector<double> train_loss;  // mean batch loss per epoch
  std::vector<double> eval_mse;    // per epoch, only when an eval set is given
};

// Adam on batched MSE. Deterministic for a fixed config.seed: parameter
// init and per-epoch shuffles come from derived sub-seeds. The last partial
// batch of each epoch is kept.
TrainResult train(const TrainingSet& data, const TrainConfig& config, ModelKind kind,
                  const TrainingSet* eval = nullptr);

struct CvReport {
  std::size_t k = 0;
  ModelKind kind = ModelKind::Linear;
  std::string config;
  std::vector<std::size_t> fold_sizes;
  std::vector<double> fold_min_mse;             // min over epochs, per fold
  std::vector<std::size_t> fold_best_epoch;     // 1-based epoch of that minimum
  std::vector<std::vector<double>> traces;      // per fold, per epoch test MSE
  double mean_min_mse = 0.0;
};

// Seeded k-way split into near-equal folds (sizes differ by at most one).
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

// Throws Error(InsufficientData) when there are fewer pairs than folds.
CvReport cross_validate(const TrainingSet& data, const TrainConfig& config, ModelKind kind,
                        std::size_t k = 10);

std::string format_cv_report(const CvReport& report);

// Mean over all rows and columns of the squared difference.
double mse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth);
double mse(const std::vector<Eigen::VectorXd>& predicted, const std::vector<Eigen::VectorXd>& truth);

// Checkpoint: "BLSCMODL", u32 header length, JSON header (kind, dims,
// config echo, seed), then each layer's weight (row-major) and bias as
// float64 little-endian.
void save_model(const RegressionModel& model, const TrainConfig& config,
                const std::filesystem::path& path);
RegressionModel load_model(const std::filesystem::path& path);

}  // namespace binderlsc
