#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gazeload/dataset.hpp"
#include "gazeload/matrix.hpp"

namespace gazeload {

struct MlpConfig {
  std::vector<size_t> hidden_sizes = {256, 128, 64, 32, 16};
  double learning_rate = 0.00001;
  size_t epochs = 500;
  size_t batch_size = 256;
  uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

// Fully connected net: tanh on every hidden layer, sigmoid output giving
// P(high load). Weights are (fan_in x fan_out) row-major.
struct MlpModel {
  size_t input_dim = 0;
  std::vector<Matrix> weights;
  std::vector<std::vector<double>> biases;
  std::vector<double> epoch_loss;      // per-epoch mean training BCE
  std::vector<double> epoch_accuracy;  // per-epoch training accuracy

  size_t layer_count() const { return weights.size(); }
};

struct MlpGradients {
  std::vector<Matrix> dW;
  std::vector<std::vector<double>> db;
  double loss = 0.0;
  std::vector<double> probs;  // P(high) per batch row, from the same forward pass
};

struct AdamState {
  std::vector<Matrix> mW, vW;
  std::vector<std::vector<double>> mb, vb;
  uint64_t t = 0;
};

// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases;
// deterministic per (seed, layer).
MlpModel mlp_init(const MlpConfig& cfg, size_t input_dim);

// Batch forward; returns P(high) per row. A single-sample forward is a
// batch of one, so batched and individual results are bit-identical.
std::vector<double> mlp_forward_batch(const MlpModel& model, const Matrix& X);
double mlp_forward(const MlpModel& model, const std::vector<double>& x);

// Mean binary cross-entropy over the batch plus gradients for every
// parameter (computed through the numerically stable logit form).
MlpGradients mlp_backward(const MlpModel& model, const Matrix& X, const std::vector<double>& y);

// Standard Adam with bias correction. A zero state (t = 0) is valid.
AdamState adam_init(const MlpModel& model);
void adam_step(MlpModel& model, const MlpGradients& grads, AdamState& state,
               const MlpConfig& cfg);

// Shuffles per epoch with a permutation that depends only on (seed, epoch).
// row_map, when given, maps logical row index -> physical dataset row; used
// to show training is invariant to pre-permuted storage order.
MlpModel mlp_train(const WindowedDataset& train, const MlpConfig& cfg,
                   const std::vector<size_t>* row_map = nullptr);

// Binary container, magic "GLMN". Round-trips bit-exactly.
void save_mlp(const MlpModel& model, const std::string& path);
MlpModel load_mlp(const std::string& path);

}  // namespace gazeload
