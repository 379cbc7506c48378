#include "gazeload/mlp.hpp"

#include <cmath>

#include "gazeload/binio.hpp"
#include "gazeload/error.hpp"
#include "gazeload/rng.hpp"

namespace gazeload {
namespace {

constexpr char kMlpMagic[5] = "GLMN";
constexpr uint32_t kMlpVersion = 1;

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

struct ForwardCache {
  std::vector<Matrix> activations;  // activations[0] = X, then post-tanh per hidden layer
  std::vector<double> logits;       // output pre-sigmoid, one per row
};

ForwardCache forward_all(const MlpModel& model, const Matrix& X) {
  if (X.cols != model.input_dim)
    throw GazeError(ErrorCode::DimensionMismatch,
                    "input width " + std::to_string(X.cols) + " vs model " +
                        std::to_string(model.input_dim));
  ForwardCache cache;
  cache.activations.reserve(model.layer_count());
  cache.activations.push_back(X);
  for (size_t l = 0; l < model.layer_count(); ++l) {
    const Matrix& A = cache.activations.back();
    Matrix Z = matmul(A, model.weights[l]);
    for (size_t r = 0; r < Z.rows; ++r)
      for (size_t c = 0; c < Z.cols; ++c) Z.at(r, c) += model.biases[l][c];
    if (l + 1 < model.layer_count()) {
      for (double& v : Z.a) v = std::tanh(v);
      cache.activations.push_back(std::move(Z));
    } else {
      cache.logits.resize(Z.rows);
      for (size_t r = 0; r < Z.rows; ++r) cache.logits[r] = Z.at(r, 0);
    }
  }
  return cache;
}

}  // namespace

MlpModel mlp_init(const MlpConfig& cfg, size_t input_dim) {
  if (input_dim < 1) throw GazeError(ErrorCode::InvalidConfig, "input_dim must be >= 1");
  MlpModel model;
  model.input_dim = input_dim;
  std::vector<size_t> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), cfg.hidden_sizes.begin(), cfg.hidden_sizes.end());
  dims.push_back(1);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const size_t fan_in = dims[l], fan_out = dims[l + 1];
    Matrix W(fan_in, fan_out);
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Rng rng(mix_seed(cfg.seed, 0x1217 + l));
    for (double& w : W.a) w = rng.uniform(-bound, bound);
    model.weights.push_back(std::move(W));
    model.biases.emplace_back(fan_out, 0.0);
  }
  return model;
}

std::vector<double> mlp_forward_batch(const MlpModel& model, const Matrix& X) {
  ForwardCache cache = forward_all(model, X);
  std::vector<double> p(cache.logits.size());
  for (size_t i = 0; i < p.size(); ++i) p[i] = sigmoid(cache.logits[i]);
  return p;
}

double mlp_forward(const MlpModel& model, const std::vector<double>& x) {
  Matrix X(1, x.size());
  std::copy(x.begin(), x.end(), X.a.begin());
  return mlp_forward_batch(model, X)[0];
}

MlpGradients mlp_backward(const MlpModel& model, const Matrix& X, const std::vector<double>& y) {
  if (y.size() != X.rows)
    throw GazeError(ErrorCode::DimensionMismatch, "labels vs batch rows");
  const size_t B = X.rows;
  const size_t L = model.layer_count();
  ForwardCache cache = forward_all(model, X);

  MlpGradients g;
  g.dW.resize(L);
  g.db.resize(L);

  double loss = 0.0;
  for (size_t r = 0; r < B; ++r) loss += softplus(cache.logits[r]) - y[r] * cache.logits[r];
  g.loss = loss / static_cast<double>(B);
  g.probs.resize(B);
  for (size_t r = 0; r < B; ++r) g.probs[r] = sigmoid(cache.logits[r]);

  // dZ for the output layer: (p - y) / B, shape (B x 1)
  Matrix dZ(B, 1);
  for (size_t r = 0; r < B; ++r)
    dZ.at(r, 0) = (g.probs[r] - y[r]) / static_cast<double>(B);

  for (size_t l = L; l-- > 0;) {
    const Matrix& A_in = cache.activations[l];
    g.dW[l] = matmul(transpose(A_in), dZ);
    g.db[l].assign(dZ.cols, 0.0);
    for (size_t r = 0; r < dZ.rows; ++r)
      for (size_t c = 0; c < dZ.cols; ++c) g.db[l][c] += dZ.at(r, c);
    if (l == 0) break;  // the gradient w.r.t. the raw inputs is never needed
    Matrix dA = matmul(dZ, transpose(model.weights[l]));
    const Matrix& A = cache.activations[l];  // post-tanh output of layer l-1
    for (size_t i = 0; i < dA.a.size(); ++i) dA.a[i] *= 1.0 - A.a[i] * A.a[i];
    dZ = std::move(dA);
  }
  return g;
}

AdamState adam_init(const MlpModel& model) {
  AdamState s;
  for (size_t l = 0; l < model.layer_count(); ++l) {
    s.mW.emplace_back(model.weights[l].rows, model.weights[l].cols);
    s.vW.emplace_back(model.weights[l].rows, model.weights[l].cols);
    s.mb.emplace_back(model.biases[l].size(), 0.0);
    s.vb.emplace_back(model.biases[l].size(), 0.0);
  }
  return s;
}

void adam_step(MlpModel& model, const MlpGradients& grads, AdamState& state,
               const MlpConfig& cfg) {
  state.t += 1;
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  auto update = [&](double& p, double g, double& m, double& v) {
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    const double mhat = m / c1;
    const double vhat = v / c2;
    p -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_eps);
  };
  for (size_t l = 0; l < model.layer_count(); ++l) {
    for (size_t i = 0; i < model.weights[l].a.size(); ++i)
      update(model.weights[l].a[i], grads.dW[l].a[i], state.mW[l].a[i], state.vW[l].a[i]);
    for (size_t i = 0; i < model.biases[l].size(); ++i)
      update(model.biases[l][i], grads.db[l][i], state.mb[l][i], state.vb[l][i]);
  }
}

MlpModel mlp_train(const WindowedDataset& train, const MlpConfig& cfg,
                   const std::vector<size_t>* row_map) {
  const size_t n = train.rows();
  if (n == 0) throw GazeError(ErrorCode::EmptySet, "empty training set");
  bool c0 = false, c1 = false;
  for (int l : train.labels) (l == 0 ? c0 : c1) = true;
  if (!c0 || !c1) throw GazeError(ErrorCode::SingleClassData, "training needs both classes");
  if (row_map && row_map->size() != n)
    throw GazeError(ErrorCode::LengthMismatch, "row_map size vs dataset rows");

  MlpModel model = mlp_init(cfg, train.inputs.cols);
  AdamState state = adam_init(model);

  const size_t bs = std::max<size_t>(1, cfg.batch_size);
  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<size_t> perm = epoch_permutation(n, cfg.seed, epoch);
    double loss_sum = 0.0;
    size_t correct = 0;
    for (size_t start = 0; start < n; start += bs) {
      const size_t b = std::min(bs, n - start);
      Matrix X(b, train.inputs.cols);
      std::vector<double> y(b);
      for (size_t j = 0; j < b; ++j) {
        const size_t logical = perm[start + j];
        const size_t r = row_map ? (*row_map)[logical] : logical;
        std::copy(train.inputs.row_ptr(r), train.inputs.row_ptr(r) + train.inputs.cols,
                  X.row_ptr(j));
        y[j] = train.labels[r];
      }
      MlpGradients g = mlp_backward(model, X, y);
      loss_sum += g.loss * static_cast<double>(b);
      for (size_t j = 0; j < b; ++j)
        if ((g.probs[j] >= 0.5 ? 1.0 : 0.0) == y[j]) ++correct;
      adam_step(model, g, state, cfg);
    }
    model.epoch_loss.push_back(loss_sum / static_cast<double>(n));
    model.epoch_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(n));
  }
  return model;
}

void save_mlp(const MlpModel& model, const std::string& path) {
  BinWriter w(path);
  w.magic(kMlpMagic);
  w.u32(kMlpVersion);
  w.u64(model.layer_count());
  w.u64(model.input_dim);
  for (size_t l = 0; l < model.layer_count(); ++l) w.u64(model.weights[l].cols);
  for (size_t l = 0; l < model.layer_count(); ++l)
    w.u8(l + 1 < model.layer_count() ? 0 : 1);  // 0 = tanh, 1 = sigmoid
  for (size_t l = 0; l < model.layer_count(); ++l) {
    w.f64_array(model.weights[l].a.data(), model.weights[l].a.size());
    w.f64_array(model.biases[l].data(), model.biases[l].size());
  }
  w.u64(model.epoch_loss.size());
  w.f64_array(model.epoch_loss.data(), model.epoch_loss.size());
  w.f64_array(model.epoch_accuracy.data(), model.epoch_accuracy.size());
  w.close();
}

MlpModel load_mlp(const std::string& path) {
  BinReader r(path);
  r.expect_magic(kMlpMagic);
  const uint32_t version = r.u32();
  if (version != kMlpVersion)
    throw GazeError(ErrorCode::IoError, "unsupported model version " + std::to_string(version));
  MlpModel model;
  const uint64_t L = r.u64();
  model.input_dim = r.u64();
  std::vector<size_t> out_dims(L);
  for (auto& d : out_dims) d = r.u64();
  for (uint64_t l = 0; l < L; ++l) {
    const uint8_t tag = r.u8();
    const uint8_t expect = l + 1 < L ? 0 : 1;
    if (tag != expect) throw GazeError(ErrorCode::IoError, "unexpected activation tag in " + path);
  }
  size_t fan_in = model.input_dim;
  for (uint64_t l = 0; l < L; ++l) {
    Matrix W(fan_in, out_dims[l]);
    r.f64_array(W.a.data(), W.a.size());
    std::vector<double> b(out_dims[l]);
    r.f64_array(b.data(), b.size());
    model.weights.push_back(std::move(W));
    model.biases.push_back(std::move(b));
    fan_in = out_dims[l];
  }
  const uint64_t n_hist = r.u64();
  model.epoch_loss.resize(n_hist);
  r.f64_array(model.epoch_loss.data(), n_hist);
  model.epoch_accuracy.resize(n_hist);
  r.f64_array(model.epoch_accuracy.data(), n_hist);
  return model;
}

}  // namespace gazeload
