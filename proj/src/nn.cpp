#include "prunelab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace prunelab {

void NetworkArch::validate() const {
    if (input_dim < 1) throw std::invalid_argument("NetworkArch: input_dim must be >= 1");
    if (output_dim < 1) throw std::invalid_argument("NetworkArch: output_dim must be >= 1");
    for (int h : hidden_dims)
        if (h < 1) throw std::invalid_argument("NetworkArch: hidden dims must be >= 1");
}

std::vector<std::pair<int, int>> NetworkArch::layer_shapes() const {
    std::vector<std::pair<int, int>> shapes;
    int fan_in = input_dim;
    for (int h : hidden_dims) {
        shapes.emplace_back(fan_in, h);
        fan_in = h;
    }
    shapes.emplace_back(fan_in, output_dim);
    return shapes;
}

long NetworkArch::prunable_weight_count() const {
    long total = 0;
    for (auto [fan_in, fan_out] : layer_shapes()) total += static_cast<long>(fan_in) * fan_out;
    return total;
}

std::string NetworkArch::name() const {
    std::string s = "mlp";
    for (int h : hidden_dims) s += "-" + std::to_string(h);
    return s;
}

long Network::unmasked_weight_count() const {
    long count = 0;
    for (const auto& layer : layers) count += static_cast<long>(layer.mask.sum());
    return count;
}

double Network::weights_remaining_pct() const {
    return 100.0 * static_cast<double>(unmasked_weight_count()) /
           static_cast<double>(arch.prunable_weight_count());
}

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (rewind_step < 0) throw std::invalid_argument("TrainConfig: rewind_step must be >= 0");
}

long TrainConfig::steps_per_epoch(long n_train) const {
    return (n_train + batch_size - 1) / batch_size;
}

long TrainConfig::total_steps(long n_train) const { return steps_per_epoch(n_train) * epochs; }

Network init_network(const NetworkArch& arch, std::uint64_t seed) {
    arch.validate();
    Network net;
    net.arch = arch;
    net.init_seed = seed;
    std::mt19937_64 rng(seed);
    for (auto [fan_in, fan_out] : arch.layer_shapes()) {
        Layer layer;
        layer.weights.resize(fan_out, fan_in);
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-scale, scale);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = dist(rng);
        layer.bias = Eigen::VectorXd::Zero(fan_out);
        layer.mask = Eigen::MatrixXd::Ones(fan_out, fan_in);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

namespace {

Eigen::MatrixXd effective_weights(const Layer& layer) {
    return layer.weights.cwiseProduct(layer.mask);
}

// Forward pass keeping every post-activation; activations[0] is unused
// (the input batch stands in for it).
std::vector<Eigen::MatrixXd> forward_all(const Network& net, const RowMatrixXd& inputs) {
    const std::size_t n_layers = net.layers.size();
    std::vector<Eigen::MatrixXd> acts(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const Layer& layer = net.layers[l];
        const Eigen::MatrixXd we = effective_weights(layer);
        Eigen::MatrixXd z;
        if (l == 0)
            z.noalias() = inputs * we.transpose();
        else
            z.noalias() = acts[l - 1] * we.transpose();
        z.rowwise() += layer.bias.transpose();
        if (l + 1 < n_layers) z = z.cwiseMax(0.0);  // relu on hidden layers only
        acts[l] = std::move(z);
    }
    return acts;
}

void check_input_width(const Network& net, const Eigen::Index cols) {
    if (cols != net.arch.input_dim)
        throw std::invalid_argument("forward: input width " + std::to_string(cols) +
                                    " does not match arch input_dim " +
                                    std::to_string(net.arch.input_dim));
}

Checkpoint capture_checkpoint(const Network& net, long step) {
    Checkpoint ckpt;
    ckpt.step = step;
    for (const auto& layer : net.layers) {
        ckpt.weights.push_back(layer.weights);
        ckpt.biases.push_back(layer.bias);
    }
    return ckpt;
}

}  // namespace

Eigen::MatrixXd forward(const Network& net, const RowMatrixXd& inputs) {
    check_input_width(net, inputs.cols());
    if (net.layers.empty()) throw std::invalid_argument("forward: network has no layers");
    auto acts = forward_all(net, inputs);
    return std::move(acts.back());
}

LossGrad loss_and_grad(const Network& net, const RowMatrixXd& inputs,
                       const std::vector<int>& labels) {
    check_input_width(net, inputs.cols());
    const long n = inputs.rows();
    if (n == 0) throw std::invalid_argument("loss_and_grad: empty batch");
    if (static_cast<long>(labels.size()) != n)
        throw std::invalid_argument("loss_and_grad: label count does not match batch size");
    for (int y : labels)
        if (y < 0 || y >= net.arch.output_dim)
            throw std::invalid_argument("loss_and_grad: label out of range");

    const std::size_t n_layers = net.layers.size();
    auto acts = forward_all(net, inputs);
    const Eigen::MatrixXd& logits = acts.back();

    // Numerically stable softmax + mean cross-entropy.
    Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    Eigen::MatrixXd probs = (logits.colwise() - row_max).array().exp().matrix();
    Eigen::VectorXd row_sum = probs.rowwise().sum();
    probs.array().colwise() /= row_sum.array();

    double loss = 0.0;
    for (long i = 0; i < n; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        loss -= logits(i, y) - row_max(i) - std::log(row_sum(i));
    }
    loss /= static_cast<double>(n);

    LossGrad out;
    out.loss = loss;
    out.weight_grads.resize(n_layers);
    out.bias_grads.resize(n_layers);

    Eigen::MatrixXd delta = probs;  // d(loss)/d(logits), times n
    for (long i = 0; i < n; ++i) delta(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    delta /= static_cast<double>(n);

    for (std::size_t l = n_layers; l-- > 0;) {
        const Layer& layer = net.layers[l];
        Eigen::MatrixXd wg;
        if (l == 0)
            wg.noalias() = delta.transpose() * inputs;
        else
            wg.noalias() = delta.transpose() * acts[l - 1];
        out.weight_grads[l] = wg.cwiseProduct(layer.mask);
        out.bias_grads[l] = delta.colwise().sum();
        if (l > 0) {
            Eigen::MatrixXd upstream;
            upstream.noalias() = delta * effective_weights(layer);
            // relu gate: post-activation > 0 iff pre-activation > 0
            delta = upstream.cwiseProduct(
                (acts[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return out;
}

TrainOutcome train(Network& net, const DataSplit& train_data, const DataSplit& test_data,
                   const TrainConfig& cfg) {
    cfg.validate();
    check_input_width(net, train_data.inputs.cols());
    check_input_width(net, test_data.inputs.cols());
    const long n = train_data.size();
    if (n == 0) throw std::invalid_argument("train: empty training set");
    if (cfg.rewind_step >= cfg.total_steps(n))
        throw std::invalid_argument("train: rewind_step must be less than total step count");

    std::vector<long> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0L);
    std::mt19937_64 shuffle_rng(cfg.seed);

    TrainOutcome out;
    RowMatrixXd batch_x(cfg.batch_size, net.arch.input_dim);
    std::vector<int> batch_y(static_cast<std::size_t>(cfg.batch_size));
    long step = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (long start = 0; start < n; start += cfg.batch_size) {
            const long bs = std::min<long>(cfg.batch_size, n - start);
            if (step == cfg.rewind_step) out.checkpoint = capture_checkpoint(net, step);

            if (bs != batch_x.rows()) {
                batch_x.resize(bs, net.arch.input_dim);
                batch_y.resize(static_cast<std::size_t>(bs));
            }
            for (long i = 0; i < bs; ++i) {
                const long src = order[static_cast<std::size_t>(start + i)];
                batch_x.row(i) = train_data.inputs.row(src);
                batch_y[static_cast<std::size_t>(i)] =
                    train_data.labels[static_cast<std::size_t>(src)];
            }

            LossGrad lg = loss_and_grad(net, batch_x, batch_y);
            if (!std::isfinite(lg.loss)) {
                out.diverged = true;
                return out;
            }
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                net.layers[l].weights -= cfg.learning_rate * lg.weight_grads[l];
                net.layers[l].bias -= cfg.learning_rate * lg.bias_grads[l];
            }
            ++step;
        }
        out.test_accuracy_history.push_back(evaluate(net, test_data));
    }
    return out;
}

double evaluate(const Network& net, const DataSplit& data) {
    if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
    if (static_cast<long>(data.labels.size()) != data.size())
        throw std::invalid_argument("evaluate: label count does not match input count");
    const Eigen::MatrixXd logits = forward(net, data.inputs);
    long correct = 0;
    for (long i = 0; i < logits.rows(); ++i) {
        int best = 0;
        for (int j = 1; j < logits.cols(); ++j)
            if (logits(i, j) > logits(i, best)) best = j;  // ties keep the lower index
        if (best == data.labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

// ---------------------------------------------------------------------------
// Serialization. Little-endian binary; layouts documented in the README and
// frozen at version 1.
// ---------------------------------------------------------------------------

namespace {

constexpr char kNetworkMagic[4] = {'P', 'L', 'N', 'W'};
constexpr char kCheckpointMagic[4] = {'P', 'L', 'C', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T value{};
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is) throw std::runtime_error("unexpected end of file");
    return value;
}

void write_matrix_rowmajor(std::ostream& os, const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_pod(os, m(r, c));
}

void read_matrix_rowmajor(std::istream& is, Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = read_pod<double>(is);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return is;
}

void check_magic(std::istream& is, const char expect[4], const std::string& what) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, expect, 4) != 0)
        throw std::runtime_error("not a " + what + " file (bad magic)");
    const auto version = read_pod<std::uint32_t>(is);
    if (version != kFormatVersion)
        throw std::runtime_error("unsupported " + what + " format version " +
                                 std::to_string(version));
}

}  // namespace

void save_network(const Network& net, const std::string& path) {
    auto os = open_out(path);
    os.write(kNetworkMagic, 4);
    write_pod(os, kFormatVersion);
    write_pod(os, net.init_seed);
    write_pod(os, static_cast<std::int32_t>(net.arch.input_dim));
    write_pod(os, static_cast<std::int32_t>(net.arch.hidden_dims.size()));
    for (int h : net.arch.hidden_dims) write_pod(os, static_cast<std::int32_t>(h));
    write_pod(os, static_cast<std::int32_t>(net.arch.output_dim));
    write_pod(os, static_cast<std::uint8_t>(net.arch.activation));
    for (const auto& layer : net.layers) {
        write_matrix_rowmajor(os, layer.weights);
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) write_pod(os, layer.bias(i));
        for (Eigen::Index r = 0; r < layer.mask.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.mask.cols(); ++c)
                write_pod(os, static_cast<std::uint8_t>(layer.mask(r, c) != 0.0 ? 1 : 0));
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

Network load_network(const std::string& path) {
    auto is = open_in(path);
    check_magic(is, kNetworkMagic, "network");
    Network net;
    net.init_seed = read_pod<std::uint64_t>(is);
    NetworkArch arch;
    arch.input_dim = read_pod<std::int32_t>(is);
    const auto n_hidden = read_pod<std::int32_t>(is);
    for (int i = 0; i < n_hidden; ++i) arch.hidden_dims.push_back(read_pod<std::int32_t>(is));
    arch.output_dim = read_pod<std::int32_t>(is);
    arch.activation = static_cast<Activation>(read_pod<std::uint8_t>(is));
    net.arch = arch;
    for (auto [fan_in, fan_out] : arch.layer_shapes()) {
        Layer layer;
        layer.weights.resize(fan_out, fan_in);
        read_matrix_rowmajor(is, layer.weights);
        layer.bias.resize(fan_out);
        for (int i = 0; i < fan_out; ++i) layer.bias(i) = read_pod<double>(is);
        layer.mask.resize(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) layer.mask(r, c) = read_pod<std::uint8_t>(is) ? 1.0 : 0.0;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    auto os = open_out(path);
    os.write(kCheckpointMagic, 4);
    write_pod(os, kFormatVersion);
    write_pod(os, static_cast<std::int64_t>(ckpt.step));
    write_pod(os, static_cast<std::int32_t>(ckpt.weights.size()));
    for (std::size_t l = 0; l < ckpt.weights.size(); ++l) {
        write_pod(os, static_cast<std::int32_t>(ckpt.weights[l].rows()));
        write_pod(os, static_cast<std::int32_t>(ckpt.weights[l].cols()));
        write_matrix_rowmajor(os, ckpt.weights[l]);
        for (Eigen::Index i = 0; i < ckpt.biases[l].size(); ++i) write_pod(os, ckpt.biases[l](i));
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    auto is = open_in(path);
    check_magic(is, kCheckpointMagic, "checkpoint");
    Checkpoint ckpt;
    ckpt.step = read_pod<std::int64_t>(is);
    const auto n_layers = read_pod<std::int32_t>(is);
    for (int l = 0; l < n_layers; ++l) {
        const auto rows = read_pod<std::int32_t>(is);
        const auto cols = read_pod<std::int32_t>(is);
        Eigen::MatrixXd w(rows, cols);
        read_matrix_rowmajor(is, w);
        Eigen::VectorXd b(rows);
        for (int i = 0; i < rows; ++i) b(i) = read_pod<double>(is);
        ckpt.weights.push_back(std::move(w));
        ckpt.biases.push_back(std::move(b));
    }
    return ckpt;
}

}  // namespace prunelab
