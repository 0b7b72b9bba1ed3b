#include "binderlsc/regressor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "binderlsc/error.hpp"
#include "binderlsc/rng.hpp"
#include "binderlsc/text.hpp"

namespace binderlsc {

std::string to_string(ModelKind kind) { return kind == ModelKind::Linear ? "lt" : "mlp"; }

ModelKind parse_model_kind(const std::string& name) {
  std::string lower = name;
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "lt" || lower == "linear") return ModelKind::Linear;
  if (lower == "mlp") return ModelKind::Mlp;
  throw Error(ErrorCode::Config, "unknown model kind '" + name + "' (expected lt or mlp)");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::Validation, "batch_size must be >= 1");
  if (epochs < 1) throw Error(ErrorCode::Validation, "epochs must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(ErrorCode::Validation, "learning_rate must be > 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw Error(ErrorCode::Validation, "invalid Adam settings");
  }
  for (auto w : hidden) {
    if (w == 0) throw Error(ErrorCode::Validation, "hidden widths must be >= 1");
  }
}

std::string TrainConfig::describe() const {
  std::string h;
  for (std::size_t i = 0; i < hidden.size(); ++i) h += (i ? "," : "") + std::to_string(hidden[i]);
  return "optimizer=adam beta1=" + text::format_double(beta1) +
         " beta2=" + text::format_double(beta2) + " eps=" + text::format_double(epsilon) +
         " lr=" + text::format_double(learning_rate) + " batch=" + std::to_string(batch_size) +
         " epochs=" + std::to_string(epochs) + " seed=" + std::to_string(seed) +
         " hidden=" + h + " init=kaiming_uniform/xavier_uniform";
}

TrainingSet TrainingSet::subset(const std::vector<std::size_t>& rows) const {
  TrainingSet out;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()), targets.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    out.inputs.row(static_cast<Eigen::Index>(i)) = inputs.row(r);
    out.targets.row(static_cast<Eigen::Index>(i)) = targets.row(r);
    if (!words.empty()) out.words.push_back(words[rows[i]]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model

namespace {

Eigen::MatrixXd uniform_matrix(Eigen::Index rows, Eigen::Index cols, double bound, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  // Row-major fill order keeps the draw sequence independent of Eigen's storage.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-bound, bound);
  }
  return m;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Keeps 6*sigmoid strictly inside (0, 6) where double rounding saturates.
double squash(double z) {
  constexpr double lo = std::numeric_limits<double>::denorm_min();
  const double hi = std::nextafter(kOutputScale, 0.0);
  return std::clamp(kOutputScale * sigmoid(z), lo, hi);
}

}  // namespace

RegressionModel RegressionModel::initialize(ModelKind kind, std::size_t input_dim,
                                            std::size_t output_dim,
                                            const std::vector<std::size_t>& hidden, Rng& rng) {
  if (input_dim == 0 || output_dim == 0) {
    throw Error(ErrorCode::Validation, "model dimensions must be positive");
  }
  std::vector<std::size_t> widths{input_dim};
  if (kind == ModelKind::Mlp) widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(output_dim);

  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto fan_in = static_cast<double>(widths[l]);
    const auto fan_out = static_cast<double>(widths[l + 1]);
    const bool output_layer = l + 2 == widths.size();
    const double bound =
        output_layer ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
    layers.push_back({uniform_matrix(static_cast<Eigen::Index>(widths[l + 1]),
                                     static_cast<Eigen::Index>(widths[l]), bound, rng),
                      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(widths[l + 1]))});
  }
  return RegressionModel(kind, std::move(layers));
}

RegressionModel::RegressionModel(ModelKind kind, std::vector<DenseLayer> layers)
    : kind_(kind), layers_(std::move(layers)) {
  if (layers_.empty()) throw Error(ErrorCode::Shape, "model has no layers");
  if (kind_ == ModelKind::Linear && layers_.size() != 1) {
    throw Error(ErrorCode::Shape, "linear model must have exactly one layer");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].weight.rows()) {
      throw Error(ErrorCode::Shape, "layer " + std::to_string(l) + ": bias/weight mismatch");
    }
    if (l > 0 && layers_[l].weight.cols() != layers_[l - 1].weight.rows()) {
      throw Error(ErrorCode::Shape, "layer " + std::to_string(l) + ": input width mismatch");
    }
  }
}

std::size_t RegressionModel::input_dim() const {
  return static_cast<std::size_t>(layers_.front().weight.cols());
}

std::size_t RegressionModel::output_dim() const {
  return static_cast<std::size_t>(layers_.back().weight.rows());
}

std::vector<std::size_t> RegressionModel::hidden_widths() const {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    out.push_back(static_cast<std::size_t>(layers_[l].weight.rows()));
  }
  return out;
}

std::size_t RegressionModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  }
  return n;
}

Eigen::MatrixXd RegressionModel::predict_batch(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.cols()) != input_dim()) {
    throw Error(ErrorCode::Shape, "input has " + std::to_string(x.cols()) +
                                      " columns, model expects " + std::to_string(input_dim()));
  }
  if (!x.allFinite()) throw Error(ErrorCode::Data, "non-finite model input");
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = h * layers_[l].weight.transpose();
    z.rowwise() += layers_[l].bias.transpose();
    if (l + 1 < layers_.size()) {
      h = z.cwiseMax(0.0);
    } else {
      h = z.unaryExpr([](double v) { return squash(v); });
    }
  }
  return h;
}

Eigen::VectorXd RegressionModel::predict(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim()) {
    throw Error(ErrorCode::Shape, "input has length " + std::to_string(x.size()) +
                                      ", model expects " + std::to_string(input_dim()));
  }
  return predict_batch(x.transpose()).row(0).transpose();
}

double RegressionModel::loss_and_gradients(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                           Gradients& grads) const {
  const std::size_t depth = layers_.size();
  // activations[l] is the input to layer l; pre[l] its affine output.
  std::vector<Eigen::MatrixXd> activations(depth);
  std::vector<Eigen::MatrixXd> pre(depth);
  activations[0] = x;
  for (std::size_t l = 0; l < depth; ++l) {
    pre[l] = activations[l] * layers_[l].weight.transpose();
    pre[l].rowwise() += layers_[l].bias.transpose();
    if (l + 1 < depth) activations[l + 1] = pre[l].cwiseMax(0.0);
  }
  const Eigen::MatrixXd sig = pre.back().unaryExpr([](double v) { return sigmoid(v); });
  const Eigen::MatrixXd diff = kOutputScale * sig - y;
  const double count = static_cast<double>(y.rows() * y.cols());
  const double loss = diff.squaredNorm() / count;

  grads.weight.resize(depth);
  grads.bias.resize(depth);
  // d loss / d pre for the output layer.
  Eigen::MatrixXd delta =
      (2.0 / count) * diff.cwiseProduct(kOutputScale * sig.cwiseProduct((1.0 - sig.array()).matrix()));
  for (std::size_t l = depth; l-- > 0;) {
    grads.weight[l] = delta.transpose() * activations[l];
    grads.bias[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd upstream = delta * layers_[l].weight;
      delta = upstream.cwiseProduct(
          pre[l - 1].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    }
  }
  return loss;
}

double RegressionModel::loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) const {
  Gradients unused;
  return loss_and_gradients(x, y, unused);
}

// ---------------------------------------------------------------------------
// Training

namespace {

class Adam {
 public:
  Adam(const RegressionModel& model, const TrainConfig& cfg) : cfg_(cfg) {
    for (const auto& layer : model.layers()) {
      m_w_.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
      v_w_.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
      m_b_.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
      v_b_.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
    }
  }

  void step(RegressionModel& model, const Gradients& g) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    auto& layers = model.mutable_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].weight, g.weight[l], m_w_[l], v_w_[l], c1, c2);
      update(layers[l].bias, g.bias[l], m_b_[l], v_b_[l], c1, c2);
    }
  }

 private:
  template <typename P>
  void update(P& param, const P& grad, P& m, P& v, double c1, double c2) const {
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * grad;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
    param.array() -= cfg_.learning_rate * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + cfg_.epsilon);
  }

  const TrainConfig& cfg_;
  std::vector<Eigen::MatrixXd> m_w_, v_w_;
  std::vector<Eigen::VectorXd> m_b_, v_b_;
  std::size_t t_ = 0;
};

void validate_pairs(const TrainingSet& data) {
  if (data.size() == 0) throw Error(ErrorCode::InsufficientData, "no training pairs");
  if (data.targets.rows() != data.inputs.rows()) {
    throw Error(ErrorCode::Shape, "inputs and targets have different row counts");
  }
  if (!data.inputs.allFinite()) throw Error(ErrorCode::Validation, "non-finite training input");
  for (Eigen::Index r = 0; r < data.targets.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.targets.cols(); ++c) {
      const double v = data.targets(r, c);
      if (!(v >= 0.0 && v <= kOutputScale)) {
        throw Error(ErrorCode::Validation, "target row " + std::to_string(r) + " column " +
                                               std::to_string(c) + " outside [0,6]");
      }
    }
  }
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

}  // namespace

TrainResult train(const TrainingSet& data, const TrainConfig& config, ModelKind kind,
                  const TrainingSet* eval) {
  config.validate();
  validate_pairs(data);
  if (eval && eval->size() > 0 && eval->inputs.cols() != data.inputs.cols()) {
    throw Error(ErrorCode::Shape, "evaluation inputs have a different width");
  }

  Rng init_rng(derive_seed(config.seed, "init"));
  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
  TrainResult result{
      RegressionModel::initialize(kind, static_cast<std::size_t>(data.inputs.cols()),
                                  static_cast<std::size_t>(data.targets.cols()), config.hidden,
                                  init_rng),
      {},
      {}};
  Adam adam(result.model, config);

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Gradients grads;
  Eigen::MatrixXd xb, yb;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order, shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      const auto rows = static_cast<Eigen::Index>(end - start);
      xb.resize(rows, data.inputs.cols());
      yb.resize(rows, data.targets.cols());
      for (std::size_t i = start; i < end; ++i) {
        const auto dst = static_cast<Eigen::Index>(i - start);
        xb.row(dst) = data.inputs.row(static_cast<Eigen::Index>(order[i]));
        yb.row(dst) = data.targets.row(static_cast<Eigen::Index>(order[i]));
      }
      const double loss = result.model.loss_and_gradients(xb, yb, grads);
      if (!std::isfinite(loss)) {
        throw Error(ErrorCode::Divergence, "non-finite loss in epoch " + std::to_string(epoch));
      }
      adam.step(result.model, grads);
      loss_sum += loss;
      ++batches;
    }
    result.train_loss.push_back(loss_sum / static_cast<double>(batches));
    if (eval && eval->size() > 0) {
      result.eval_mse.push_back(mse(result.model.predict_batch(eval->inputs), eval->targets));
    }
  }
  return result;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k,
                                                 std::uint64_t seed) {
  if (k == 0) throw Error(ErrorCode::Validation, "k must be >= 1");
  if (n < k) {
    throw Error(ErrorCode::InsufficientData, std::to_string(n) + " pairs cannot fill " +
                                                 std::to_string(k) + " folds");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, "fold-split"));
  shuffle(perm, rng);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

CvReport cross_validate(const TrainingSet& data, const TrainConfig& config, ModelKind kind,
                        std::size_t k) {
  config.validate();
  validate_pairs(data);
  const auto folds = make_folds(data.size(), k, config.seed);

  CvReport report;
  report.k = k;
  report.kind = kind;
  report.config = config.describe();
  double total = 0.0;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows;
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    const auto train_set = data.subset(train_rows);
    const auto test_set = data.subset(folds[f]);
    TrainConfig fold_config = config;
    fold_config.seed = derive_seed(config.seed, "fold-" + std::to_string(f));
    auto result = train(train_set, fold_config, kind, &test_set);

    const auto best = std::min_element(result.eval_mse.begin(), result.eval_mse.end());
    report.fold_sizes.push_back(folds[f].size());
    report.fold_min_mse.push_back(*best);
    report.fold_best_epoch.push_back(
        static_cast<std::size_t>(best - result.eval_mse.begin()) + 1);
    report.traces.push_back(std::move(result.eval_mse));
    total += *best;
  }
  report.mean_min_mse = total / static_cast<double>(k);
  return report;
}

std::string format_cv_report(const CvReport& report) {
  std::string out;
  out += "kind\t" + to_string(report.kind) + "\n";
  out += "k\t" + std::to_string(report.k) + "\n";
  out += "config\t" + report.config + "\n";
  out += "mean_min_mse\t" + text::format_double(report.mean_min_mse) + "\n";
  out += "fold\tsize\tmin_mse\tbest_epoch\n";
  for (std::size_t f = 0; f < report.fold_min_mse.size(); ++f) {
    out += std::to_string(f) + "\t" + std::to_string(report.fold_sizes[f]) + "\t" +
           text::format_double(report.fold_min_mse[f]) + "\t" +
           std::to_string(report.fold_best_epoch[f]) + "\n";
  }
  out += "trace\tfold\tepoch\ttest_mse\n";
  for (std::size_t f = 0; f < report.traces.size(); ++f) {
    for (std::size_t e = 0; e < report.traces[f].size(); ++e) {
      out += "trace\t" + std::to_string(f) + "\t" + std::to_string(e + 1) + "\t" +
             text::format_double(report.traces[f][e]) + "\n";
    }
  }
  return out;
}

double mse(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols()) {
    throw Error(ErrorCode::Shape, "mse: shape mismatch");
  }
  if (predicted.size() == 0) throw Error(ErrorCode::Shape, "mse: empty input");
  return (predicted - truth).squaredNorm() / static_cast<double>(predicted.size());
}

double mse(const std::vector<Eigen::VectorXd>& predicted,
           const std::vector<Eigen::VectorXd>& truth) {
  if (predicted.size() != truth.size()) throw Error(ErrorCode::Shape, "mse: length mismatch");
  if (predicted.empty()) throw Error(ErrorCode::Shape, "mse: empty input");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i].size() != truth[i].size()) throw Error(ErrorCode::Shape, "mse: dim mismatch");
    sum += (predicted[i] - truth[i]).squaredNorm();
    count += static_cast<std::size_t>(truth[i].size());
  }
  return sum / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr char kModelMagic[8] = {'B', 'L', 'S', 'C', 'M', 'O', 'D', 'L'};

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

void save_model(const RegressionModel& model, const TrainConfig& config,
                const std::filesystem::path& path) {
  nlohmann::json header = {
      {"kind", to_string(model.kind())},
      {"input_dim", model.input_dim()},
      {"output_dim", model.output_dim()},
      {"hidden", model.hidden_widths()},
      {"seed", config.seed},
      {"config", config.describe()},
  };
  const std::string head = header.dump();
  std::string out(kModelMagic, 8);
  const auto len = static_cast<std::uint32_t>(head.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
  out += head;
  for (const auto& layer : model.layers()) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) put_f64(out, layer.weight(r, c));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) put_f64(out, layer.bias[r]);
  }
  text::write_file(path, out);
}

RegressionModel load_model(const std::filesystem::path& path) {
  const std::string bytes = text::read_file(path);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kModelMagic, 8) != 0) {
    throw Error(ErrorCode::Format, path.string() + ": not a model checkpoint");
  }
  std::uint32_t len = 0;
  for (int i = 3; i >= 0; --i) len = (len << 8) | p[8 + i];
  if (12 + static_cast<std::size_t>(len) > bytes.size()) {
    throw Error(ErrorCode::Format, path.string() + ": truncated checkpoint header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(12, len));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": bad checkpoint header: " + e.what());
  }
  const ModelKind kind = parse_model_kind(header.at("kind").get<std::string>());
  std::vector<std::size_t> widths{header.at("input_dim").get<std::size_t>()};
  for (auto w : header.at("hidden").get<std::vector<std::size_t>>()) widths.push_back(w);
  widths.push_back(header.at("output_dim").get<std::size_t>());

  std::size_t offset = 12 + len;
  auto next = [&]() {
    if (offset + 8 > bytes.size()) {
      throw Error(ErrorCode::Format, path.string() + ": truncated checkpoint parameters");
    }
    const double v = get_f64(p + offset);
    offset += 8;
    return v;
  };
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer{Eigen::MatrixXd(static_cast<Eigen::Index>(widths[l + 1]),
                                     static_cast<Eigen::Index>(widths[l])),
                     Eigen::VectorXd(static_cast<Eigen::Index>(widths[l + 1]))};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = next();
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias[r] = next();
    layers.push_back(std::move(layer));
  }
  if (offset != bytes.size()) {
    throw Error(ErrorCode::Format, path.string() + ": trailing bytes after parameters");
  }
  return RegressionModel(kind, std::move(layers));
}

}  // namespace binderlsc
