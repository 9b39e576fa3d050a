#include "spillnet/recurrent.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "spillnet/error.hpp"
#include "spillnet/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace spillnet::rnn {

namespace {

Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& z) {
    return 1.0 / (1.0 + (-z).exp());
}

void fill_uniform(Eigen::MatrixXd& m, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
}

LstmLayerParams init_layer(int input, int hidden, std::mt19937_64& rng) {
    LstmLayerParams p;
    p.w_input.resize(4 * hidden, input);
    fill_uniform(p.w_input, 1.0 / std::sqrt(input), rng);
    p.w_recurrent.resize(4 * hidden, hidden);
    fill_uniform(p.w_recurrent, 1.0 / std::sqrt(hidden), rng);
    p.bias = Eigen::VectorXd::Zero(4 * hidden);
    p.bias.segment(hidden, hidden).setOnes(); // forget gate
    return p;
}

} // namespace

BiLstmStack BiLstmStack::init(int input_size, int units1, int units2, double dropout_rate,
                              std::uint64_t seed) {
    if (input_size < 1 || units1 < 1 || units2 < 1)
        throw ConfigError("BiLstmStack: sizes must be >= 1");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ConfigError("BiLstmStack: dropout rate must lie in [0, 1)");
    std::mt19937_64 rng = make_rng(seed, 0);
    BiLstmStack stack;
    stack.input_size = input_size;
    stack.units1 = units1;
    stack.units2 = units2;
    stack.dropout_rate = dropout_rate;
    stack.layer1.fwd = init_layer(input_size, units1, rng);
    stack.layer1.bwd = init_layer(input_size, units1, rng);
    stack.layer2.fwd = init_layer(2 * units1, units2, rng);
    stack.layer2.bwd = init_layer(2 * units1, units2, rng);
    const double head_bound = 1.0 / std::sqrt(2.0 * units2);
    std::uniform_real_distribution<double> dist(-head_bound, head_bound);
    stack.head_weight.resize(2 * units2);
    for (Eigen::Index i = 0; i < stack.head_weight.size(); ++i) stack.head_weight(i) = dist(rng);
    stack.head_bias = 0.0;
    return stack;
}

std::vector<ParamBlock> param_layout(const BiLstmStack& stack) {
    std::vector<ParamBlock> blocks;
    Eigen::Index offset = 0;
    auto add = [&](const std::string& name, Eigen::Index size) {
        blocks.push_back({name, offset, size});
        offset += size;
    };
    auto add_layer = [&](const std::string& prefix, const LstmLayerParams& p) {
        add(prefix + ".w_input", p.w_input.size());
        add(prefix + ".w_recurrent", p.w_recurrent.size());
        add(prefix + ".bias", p.bias.size());
    };
    add_layer("layer1.forward", stack.layer1.fwd);
    add_layer("layer1.backward", stack.layer1.bwd);
    add_layer("layer2.forward", stack.layer2.fwd);
    add_layer("layer2.backward", stack.layer2.bwd);
    add("head.weight", stack.head_weight.size());
    add("head.bias", 1);
    return blocks;
}

Eigen::Index param_count(const BiLstmStack& stack) {
    const auto blocks = param_layout(stack);
    return blocks.back().offset + blocks.back().size;
}

namespace {

template <typename Fn>
void visit_arrays(const BiLstmStack& stack, Fn&& fn) {
    for (const auto* layer : {&stack.layer1.fwd, &stack.layer1.bwd, &stack.layer2.fwd,
                              &stack.layer2.bwd}) {
        fn(layer->w_input);
        fn(layer->w_recurrent);
        fn(layer->bias);
    }
    fn(stack.head_weight);
}

template <typename Fn>
void visit_arrays_mut(BiLstmStack& stack, Fn&& fn) {
    for (auto* layer :
         {&stack.layer1.fwd, &stack.layer1.bwd, &stack.layer2.fwd, &stack.layer2.bwd}) {
        fn(layer->w_input);
        fn(layer->w_recurrent);
        fn(layer->bias);
    }
    fn(stack.head_weight);
}

} // namespace

Eigen::VectorXd pack_params(const BiLstmStack& stack) {
    Eigen::VectorXd flat(param_count(stack));
    Eigen::Index pos = 0;
    visit_arrays(stack, [&](const auto& arr) {
        flat.segment(pos, arr.size()) = Eigen::Map<const Eigen::VectorXd>(arr.data(), arr.size());
        pos += arr.size();
    });
    flat(pos++) = stack.head_bias;
    return flat;
}

void unpack_params(BiLstmStack& stack, const Eigen::VectorXd& flat) {
    if (flat.size() != param_count(stack))
        throw DataError("unpack_params: parameter vector size mismatch");
    Eigen::Index pos = 0;
    visit_arrays_mut(stack, [&](auto& arr) {
        Eigen::Map<Eigen::VectorXd>(arr.data(), arr.size()) = flat.segment(pos, arr.size());
        pos += arr.size();
    });
    stack.head_bias = flat(pos++);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> lstm_cell_step(const LstmLayerParams& params,
                                                           const Eigen::VectorXd& x,
                                                           const Eigen::VectorXd& h_prev,
                                                           const Eigen::VectorXd& c_prev) {
    const int h = params.hidden();
    if (x.size() != params.input() || h_prev.size() != h || c_prev.size() != h)
        throw DataError("lstm_cell_step: shape mismatch");
    Eigen::VectorXd z = params.w_input * x + params.w_recurrent * h_prev + params.bias;
    Eigen::ArrayXd gi = sigmoid(z.segment(0, h).array());
    Eigen::ArrayXd gf = sigmoid(z.segment(h, h).array());
    Eigen::ArrayXd gg = z.segment(2 * h, h).array().tanh();
    Eigen::ArrayXd go = sigmoid(z.segment(3 * h, h).array());
    Eigen::VectorXd c = (gf * c_prev.array() + gi * gg).matrix();
    Eigen::VectorXd hidden = (go * c.array().tanh()).matrix();
    return {hidden, c};
}

namespace {

detail::DirectionCache run_direction(const LstmLayerParams& params,
                                     const std::vector<Eigen::VectorXd>& inputs) {
    const int h = params.hidden();
    detail::DirectionCache cache;
    cache.steps.reserve(inputs.size());
    Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
    for (const auto& x : inputs) {
        if (x.size() != params.input()) throw DataError("bilstm_forward: input width mismatch");
        Eigen::VectorXd z = params.w_input * x + params.w_recurrent * h_prev + params.bias;
        detail::StepCache step;
        step.x = x;
        step.gate_i = sigmoid(z.segment(0, h).array()).matrix();
        step.gate_f = sigmoid(z.segment(h, h).array()).matrix();
        step.gate_g = z.segment(2 * h, h).array().tanh().matrix();
        step.gate_o = sigmoid(z.segment(3 * h, h).array()).matrix();
        step.c = (step.gate_f.array() * c_prev.array() + step.gate_i.array() * step.gate_g.array())
                     .matrix();
        step.tanh_c = step.c.array().tanh().matrix();
        step.h = (step.gate_o.array() * step.tanh_c.array()).matrix();
        h_prev = step.h;
        c_prev = step.c;
        cache.steps.push_back(std::move(step));
    }
    return cache;
}

// Backprop through one direction. dh_out holds the externally injected
// gradient per processed step; returns per-step input gradients.
struct DirectionResult {
    LayerGrads grads;
    std::vector<Eigen::VectorXd> dx;
};

DirectionResult backprop_direction(const LstmLayerParams& params,
                                   const detail::DirectionCache& cache,
                                   const std::vector<Eigen::VectorXd>& dh_out) {
    const int h = params.hidden();
    const int d = params.input();
    const int steps = static_cast<int>(cache.steps.size());

    DirectionResult result;
    result.grads.w_input = Eigen::MatrixXd::Zero(4 * h, d);
    result.grads.w_recurrent = Eigen::MatrixXd::Zero(4 * h, h);
    result.grads.bias = Eigen::VectorXd::Zero(4 * h);
    result.dx.resize(steps);

    Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
    Eigen::VectorXd dz(4 * h);
    for (int t = steps - 1; t >= 0; --t) {
        const auto& step = cache.steps[t];
        Eigen::ArrayXd dh = dh_out[t].array() + dh_next.array();
        Eigen::ArrayXd dc =
            dc_next.array() + dh * step.gate_o.array() * (1.0 - step.tanh_c.array().square());
        Eigen::ArrayXd d_o = dh * step.tanh_c.array();
        Eigen::ArrayXd c_prev = Eigen::ArrayXd::Zero(h);
        if (t > 0) c_prev = cache.steps[t - 1].c.array();
        Eigen::ArrayXd d_f = dc * c_prev;
        Eigen::ArrayXd d_i = dc * step.gate_g.array();
        Eigen::ArrayXd d_g = dc * step.gate_i.array();

        dz.segment(0, h) = (d_i * step.gate_i.array() * (1.0 - step.gate_i.array())).matrix();
        dz.segment(h, h) = (d_f * step.gate_f.array() * (1.0 - step.gate_f.array())).matrix();
        dz.segment(2 * h, h) = (d_g * (1.0 - step.gate_g.array().square())).matrix();
        dz.segment(3 * h, h) = (d_o * step.gate_o.array() * (1.0 - step.gate_o.array())).matrix();

        result.grads.w_input.noalias() += dz * step.x.transpose();
        if (t > 0) result.grads.w_recurrent.noalias() += dz * cache.steps[t - 1].h.transpose();
        result.grads.bias += dz;

        result.dx[t].noalias() = params.w_input.transpose() * dz;
        dh_next.noalias() = params.w_recurrent.transpose() * dz;
        dc_next = (dc * step.gate_f.array()).matrix();
    }
    return result;
}

} // namespace

std::pair<double, ForwardCache> bilstm_forward(const BiLstmStack& stack,
                                               const Eigen::MatrixXd& sequence, bool training,
                                               std::mt19937_64& rng,
                                               const Eigen::VectorXd* forced_dropout_mask) {
    const int seq_len = static_cast<int>(sequence.rows());
    if (seq_len < 1) throw DataError("bilstm_forward: empty sequence");
    if (sequence.cols() != stack.input_size)
        throw DataError("bilstm_forward: sequence width mismatch");

    std::vector<Eigen::VectorXd> inputs(seq_len), reversed(seq_len);
    for (int t = 0; t < seq_len; ++t) {
        inputs[t] = sequence.row(t).transpose();
        reversed[t] = sequence.row(seq_len - 1 - t).transpose();
    }

    ForwardCache cache;
    cache.training = training;
    cache.l1_fwd = run_direction(stack.layer1.fwd, inputs);
    cache.l1_bwd = run_direction(stack.layer1.bwd, reversed);

    cache.seq1.resize(seq_len);
    for (int t = 0; t < seq_len; ++t) {
        cache.seq1[t].resize(2 * stack.units1);
        cache.seq1[t] << cache.l1_fwd.steps[t].h, cache.l1_bwd.steps[seq_len - 1 - t].h;
    }
    std::vector<Eigen::VectorXd> seq1_reversed(seq_len);
    for (int t = 0; t < seq_len; ++t) seq1_reversed[t] = cache.seq1[seq_len - 1 - t];

    cache.l2_fwd = run_direction(stack.layer2.fwd, cache.seq1);
    cache.l2_bwd = run_direction(stack.layer2.bwd, seq1_reversed);

    cache.concat.resize(2 * stack.units2);
    cache.concat << cache.l2_fwd.steps[seq_len - 1].h, cache.l2_bwd.steps[seq_len - 1].h;

    if (training && (stack.dropout_rate > 0.0 || forced_dropout_mask)) {
        if (forced_dropout_mask) {
            cache.dropout_mask = *forced_dropout_mask;
        } else {
            const double keep = 1.0 - stack.dropout_rate;
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            cache.dropout_mask.resize(cache.concat.size());
            for (Eigen::Index i = 0; i < cache.dropout_mask.size(); ++i)
                cache.dropout_mask(i) = unit(rng) < keep ? 1.0 / keep : 0.0;
        }
        cache.dropped = cache.concat.cwiseProduct(cache.dropout_mask);
    } else {
        cache.dropped = cache.concat;
    }

    cache.prediction = stack.head_weight.dot(cache.dropped) + stack.head_bias;
    return {cache.prediction, std::move(cache)};
}

double loss_mse(double prediction, double target) {
    const double r = prediction - target;
    return r * r;
}

double loss_mse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size() || predictions.empty())
        throw DataError("loss_mse: need equal nonzero lengths");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        sum += loss_mse(predictions[i], targets[i]);
    return sum / static_cast<double>(predictions.size());
}

Eigen::VectorXd Gradients::pack() const {
    Eigen::Index total = 0;
    auto count = [&total](const LayerGrads& g) {
        total += g.w_input.size() + g.w_recurrent.size() + g.bias.size();
    };
    count(l1_fwd);
    count(l1_bwd);
    count(l2_fwd);
    count(l2_bwd);
    total += head_weight.size() + 1;

    Eigen::VectorXd flat(total);
    Eigen::Index pos = 0;
    auto put = [&](const auto& arr) {
        flat.segment(pos, arr.size()) = Eigen::Map<const Eigen::VectorXd>(arr.data(), arr.size());
        pos += arr.size();
    };
    for (const auto* g : {&l1_fwd, &l1_bwd, &l2_fwd, &l2_bwd}) {
        put(g->w_input);
        put(g->w_recurrent);
        put(g->bias);
    }
    put(head_weight);
    flat(pos) = head_bias;
    return flat;
}

Gradients backward(const BiLstmStack& stack, const ForwardCache& cache, double target) {
    if (cache.seq1.empty()) throw DataError("backward: stale or missing forward cache");
    if (!cache.training)
        throw DataError("backward: cache is not from a training-mode forward pass");
    const int seq_len = static_cast<int>(cache.seq1.size());
    const int u1 = stack.units1;
    const int u2 = stack.units2;

    const double dpred = 2.0 * (cache.prediction - target);

    Gradients grads;
    grads.head_weight = dpred * cache.dropped;
    grads.head_bias = dpred;

    Eigen::VectorXd ddropped = dpred * stack.head_weight;
    Eigen::VectorXd dconcat = cache.dropout_mask.size()
                                  ? ddropped.cwiseProduct(cache.dropout_mask).eval()
                                  : ddropped;

    const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(u2);
    std::vector<Eigen::VectorXd> dh2_fwd(seq_len, zero2), dh2_bwd(seq_len, zero2);
    dh2_fwd[seq_len - 1] = dconcat.head(u2);
    dh2_bwd[seq_len - 1] = dconcat.tail(u2);

    DirectionResult l2f = backprop_direction(stack.layer2.fwd, cache.l2_fwd, dh2_fwd);
    DirectionResult l2b = backprop_direction(stack.layer2.bwd, cache.l2_bwd, dh2_bwd);
    grads.l2_fwd = std::move(l2f.grads);
    grads.l2_bwd = std::move(l2b.grads);

    // dseq1 accumulates both layer-2 directions; the backward direction saw
    // the sequence reversed.
    std::vector<Eigen::VectorXd> dh1_fwd(seq_len), dh1_bwd(seq_len);
    for (int t = 0; t < seq_len; ++t) {
        Eigen::VectorXd dseq = l2f.dx[t] + l2b.dx[seq_len - 1 - t];
        dh1_fwd[t] = dseq.head(u1);
        dh1_bwd[seq_len - 1 - t] = dseq.tail(u1);
    }

    DirectionResult l1f = backprop_direction(stack.layer1.fwd, cache.l1_fwd, dh1_fwd);
    DirectionResult l1b = backprop_direction(stack.layer1.bwd, cache.l1_bwd, dh1_bwd);
    grads.l1_fwd = std::move(l1f.grads);
    grads.l1_bwd = std::move(l1b.grads);
    return grads;
}

AdamState AdamState::for_size(Eigen::Index n, double lr) {
    AdamState state;
    state.m = Eigen::VectorXd::Zero(n);
    state.v = Eigen::VectorXd::Zero(n);
    state.lr = lr;
    return state;
}

void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    if (params.size() != state.m.size() || grad.size() != state.m.size())
        throw DataError("adam_step: shape mismatch");
    ++state.step;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    const double m_corr = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double v_corr = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    params.array() -= state.lr * (state.m.array() / m_corr) /
                      ((state.v.array() / v_corr).sqrt() + state.eps);
}

TrainHistory train(BiLstmStack& stack, const std::vector<Eigen::MatrixXd>& sequences,
                   const std::vector<double>& targets, const TrainConfig& config) {
    const int n = static_cast<int>(sequences.size());
    if (n == 0 || targets.size() != sequences.size())
        throw DataError("train: empty dataset or sequence/target mismatch");
    if (config.epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (config.batch_size < 1) throw ConfigError("train: batch size must be >= 1");
    if (config.val_fraction <= 0.0 || config.val_fraction >= 1.0)
        throw ConfigError("train: val fraction must lie in (0, 1)");

    int n_val = std::max(1, static_cast<int>(std::lround(config.val_fraction * n)));
    const int n_train = n - n_val;
    if (n_train < 1) throw DataError("train: empty training split");

    std::mt19937_64 rng = make_rng(config.seed, 1);
    Eigen::VectorXd params = pack_params(stack);
    AdamState adam = AdamState::for_size(params.size(), config.learning_rate);

    TrainHistory history;
    double best_val = std::numeric_limits<double>::infinity();

    auto evaluate_val = [&] {
        double sum = 0.0;
        for (int i = n_train; i < n; ++i) {
            auto [pred, cache] = bilstm_forward(stack, sequences[i], false, rng);
            sum += loss_mse(pred, targets[i]);
        }
        return sum / n_val;
    };

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (int start = 0; start < n_train; start += config.batch_size) {
            const int stop = std::min(n_train, start + config.batch_size);
            Eigen::VectorXd batch_grad = Eigen::VectorXd::Zero(params.size());
            for (int i = start; i < stop; ++i) {
                auto [pred, cache] = bilstm_forward(stack, sequences[i], true, rng);
                epoch_loss += loss_mse(pred, targets[i]);
                batch_grad += backward(stack, cache, targets[i]).pack();
            }
            batch_grad /= static_cast<double>(stop - start);
            adam_step(adam, params, batch_grad);
            unpack_params(stack, params);
        }
        history.train_mse.push_back(epoch_loss / n_train);
        history.val_mse.push_back(evaluate_val());
        if (history.val_mse.back() < best_val) {
            best_val = history.val_mse.back();
            history.best_epoch = epoch;
            history.best_params = params;
        }
    }
    unpack_params(stack, history.best_params);
    return history;
}

std::vector<double> predict_series(const BiLstmStack& stack,
                                   const std::vector<Eigen::MatrixXd>& sequences) {
    std::mt19937_64 rng(0); // unused on inference
    std::vector<double> out;
    out.reserve(sequences.size());
    for (const auto& seq : sequences) out.push_back(bilstm_forward(stack, seq, false, rng).first);
    return out;
}

void write_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << "epoch,train_mse,val_mse\n";
    char buf[40];
    for (std::size_t e = 0; e < history.train_mse.size(); ++e) {
        std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g", e, history.train_mse[e],
                      history.val_mse[e]);
        out << buf << '\n';
    }
}

namespace {

constexpr char kCheckpointMagic[8] = {'S', 'P', 'N', 'L', 'S', 'T', 'M', '1'};

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
    T value;
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
        throw DataError("'" + path + "': truncated checkpoint");
    return value;
}

} // namespace

void save_checkpoint(const BiLstmStack& stack, const std::string& path, double target_mean,
                     double target_std) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_raw<std::uint32_t>(out, 1); // version
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(stack.input_size));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(stack.units1));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(stack.units2));
    write_raw<double>(out, stack.dropout_rate);
    write_raw<double>(out, target_mean);
    write_raw<double>(out, target_std);
    Eigen::VectorXd flat = pack_params(stack);
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(flat.size()));
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!out) throw DataError("failed writing checkpoint '" + path + "'");
}

BiLstmStack load_checkpoint(const std::string& path, double* target_mean, double* target_std) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw DataError("'" + path + "': not a model checkpoint");
    const auto version = read_raw<std::uint32_t>(in, path);
    if (version != 1)
        throw DataError("'" + path + "': unsupported checkpoint version " +
                        std::to_string(version));
    const int input_size = static_cast<int>(read_raw<std::uint32_t>(in, path));
    const int units1 = static_cast<int>(read_raw<std::uint32_t>(in, path));
    const int units2 = static_cast<int>(read_raw<std::uint32_t>(in, path));
    const double dropout = read_raw<double>(in, path);
    const double mean = read_raw<double>(in, path);
    const double stddev = read_raw<double>(in, path);

    BiLstmStack stack = BiLstmStack::init(input_size, units1, units2, dropout, 0);
    const auto n = read_raw<std::uint64_t>(in, path);
    if (static_cast<Eigen::Index>(n) != param_count(stack))
        throw DataError("'" + path + "': parameter count mismatch");
    Eigen::VectorXd flat(static_cast<Eigen::Index>(n));
    if (!in.read(reinterpret_cast<char*>(flat.data()),
                 static_cast<std::streamsize>(n * sizeof(double))))
        throw DataError("'" + path + "': truncated checkpoint");
    unpack_params(stack, flat);
    if (target_mean) *target_mean = mean;
    if (target_std) *target_std = stddev;
    return stack;
}

} // namespace spillnet::rnn
