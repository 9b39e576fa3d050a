#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace spillnet::rnn {

// One LSTM direction. Gate rows are packed [input; forget; candidate; output],
// each block of size hidden.
struct LstmLayerParams {
    Eigen::MatrixXd w_input;     // 4h x d
    Eigen::MatrixXd w_recurrent; // 4h x h
    Eigen::VectorXd bias;        // 4h

    int hidden() const { return static_cast<int>(w_recurrent.cols()); }
    int input() const { return static_cast<int>(w_input.cols()); }
};

struct BiLstmLayer {
    LstmLayerParams fwd, bwd;
};

// Two stacked bidirectional layers; layer 1 returns per-step sequences, the
// final concatenated state of layer 2 passes dropout and a dense head.
struct BiLstmStack {
    BiLstmLayer layer1, layer2;
    Eigen::VectorXd head_weight; // 2 * units2
    double head_bias = 0.0;
    double dropout_rate = 0.3;
    int input_size = 1;
    int units1 = 100;
    int units2 = 50;

    // Uniform +-1/sqrt(fan_in) weights, zero biases except forget gate = 1.
    static BiLstmStack init(int input_size, int units1, int units2, double dropout_rate,
                            std::uint64_t seed);
};

// Flat parameter vector in a fixed block order; the same order is used by
// gradients, Adam and checkpoints.
struct ParamBlock {
    std::string name;
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
};
std::vector<ParamBlock> param_layout(const BiLstmStack& stack);
Eigen::Index param_count(const BiLstmStack& stack);
Eigen::VectorXd pack_params(const BiLstmStack& stack);
void unpack_params(BiLstmStack& stack, const Eigen::VectorXd& flat);

// i, f, o = sigmoid, g = tanh; c = f.c_prev + i.g; h = o.tanh(c).
std::pair<Eigen::VectorXd, Eigen::VectorXd> lstm_cell_step(const LstmLayerParams& params,
                                                           const Eigen::VectorXd& x,
                                                           const Eigen::VectorXd& h_prev,
                                                           const Eigen::VectorXd& c_prev);

namespace detail {
struct StepCache {
    Eigen::VectorXd x, gate_i, gate_f, gate_g, gate_o, c, tanh_c, h;
};
struct DirectionCache {
    std::vector<StepCache> steps; // processing order
};
} // namespace detail

struct ForwardCache {
    detail::DirectionCache l1_fwd, l1_bwd, l2_fwd, l2_bwd;
    std::vector<Eigen::VectorXd> seq1;  // layer-1 concat output per original step
    Eigen::VectorXd concat;             // final layer-2 state pair, pre-dropout
    Eigen::VectorXd dropout_mask;       // inverted-scaling factors; empty on inference
    Eigen::VectorXd dropped;
    double prediction = 0.0;
    bool training = false;
};

// Runs the full stack on one sequence (rows are steps). In training mode the
// dropout mask is drawn from rng with inverted scaling 1/(1 - rate); the
// cache retains everything backward() needs. forced_dropout_mask is a test
// hook that bypasses the rng.
std::pair<double, ForwardCache> bilstm_forward(const BiLstmStack& stack,
                                               const Eigen::MatrixXd& sequence, bool training,
                                               std::mt19937_64& rng,
                                               const Eigen::VectorXd* forced_dropout_mask = nullptr);

double loss_mse(double prediction, double target);
double loss_mse(std::span<const double> predictions, std::span<const double> targets);

struct LayerGrads {
    Eigen::MatrixXd w_input, w_recurrent;
    Eigen::VectorXd bias;
};
struct Gradients {
    LayerGrads l1_fwd, l1_bwd, l2_fwd, l2_bwd;
    Eigen::VectorXd head_weight;
    double head_bias = 0.0;

    Eigen::VectorXd pack() const;
};

// Gradient of the squared error (prediction - target)^2 w.r.t. every
// parameter, reusing the dropout mask stored in the cache.
Gradients backward(const BiLstmStack& stack, const ForwardCache& cache, double target);

struct AdamState {
    Eigen::VectorXd m, v;
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState for_size(Eigen::Index n, double lr = 1e-3);
};

// Standard bias-corrected Adam update, in place.
void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad);

struct TrainConfig {
    int epochs = 300;
    int batch_size = 32;
    double val_fraction = 0.15;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
};

struct TrainHistory {
    std::vector<double> train_mse, val_mse;
    int best_epoch = 0;            // index of the minimum validation loss
    Eigen::VectorXd best_params;   // packed snapshot at best_epoch
};

// Chronological train/validation split (no shuffling across time); restores
// the best-epoch snapshot into the stack before returning.
TrainHistory train(BiLstmStack& stack, const std::vector<Eigen::MatrixXd>& sequences,
                   const std::vector<double>& targets, const TrainConfig& config);

std::vector<double> predict_series(const BiLstmStack& stack,
                                   const std::vector<Eigen::MatrixXd>& sequences);

void write_history_csv(const TrainHistory& history, const std::string& path);

// Versioned binary container: dimension header plus little-endian 64-bit
// parameter arrays; target standardization stats ride along for inference.
void save_checkpoint(const BiLstmStack& stack, const std::string& path, double target_mean,
                     double target_std);
BiLstmStack load_checkpoint(const std::string& path, double* target_mean = nullptr,
                            double* target_std = nullptr);

} // namespace spillnet::rnn
