#include "accdor/classifier.hpp"

#include "accdor/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

namespace accdor {

namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using ConstMatrixMap = Eigen::Map<const Matrix>;
using MatrixMap = Eigen::Map<Matrix>;

ConstMatrixMap weights_of(const DenseLayer& layer) {
    return {layer.weights.data(), layer.fan_in, layer.fan_out};
}

Eigen::Map<const RowVector> bias_of(const DenseLayer& layer) {
    return {layer.bias.data(), layer.fan_out};
}

void check_shapes(const MlpParams& params) {
    if (params.layer_dims.size() < 2 || params.layers.size() + 1 != params.layer_dims.size() ||
        params.layer_dims.back() != 1) {
        throw Error(ErrorCode::ShapeError, "layer_dims must end in a single output unit");
    }
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const auto& l = params.layers[i];
        if (l.fan_in != params.layer_dims[i] || l.fan_out != params.layer_dims[i + 1] ||
            l.weights.size() != static_cast<std::size_t>(l.fan_in) * l.fan_out ||
            l.bias.size() != static_cast<std::size_t>(l.fan_out)) {
            throw Error(ErrorCode::ShapeError, "layer " + std::to_string(i) + " shape mismatch");
        }
    }
}

double sigmoid(double z) {
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Cross-entropy on the logit, stable for large |z|.
double bce_from_logit(double z, double y) {
    return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct Batch {
    Matrix inputs;
    Vector targets;
};

Batch to_batch(std::span<const Crop> crops, int input_dim) {
    Batch b{Matrix(static_cast<Eigen::Index>(crops.size()), input_dim),
            Vector(static_cast<Eigen::Index>(crops.size()))};
    for (std::size_t i = 0; i < crops.size(); ++i) {
        const Crop& c = crops[i];
        if (c.patch.size() != static_cast<std::size_t>(input_dim)) {
            throw Error(ErrorCode::ShapeError, "crop has " + std::to_string(c.patch.size()) +
                                                   " values, classifier expects " +
                                                   std::to_string(input_dim));
        }
        if (c.label == CropLabel::Unlabeled) {
            throw Error(ErrorCode::InvalidArgument, "training crops must be labelled");
        }
        b.inputs.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const RowVector>(c.patch.data(), input_dim);
        b.targets(static_cast<Eigen::Index>(i)) = c.label == CropLabel::RealCell ? 1.0 : 0.0;
    }
    return b;
}

// Pre-activations of every layer for a batch; the last entry holds the logits.
std::vector<Matrix> forward_pass(const MlpParams& params, const Eigen::Ref<const Matrix>& inputs) {
    std::vector<Matrix> pre;
    pre.reserve(params.layers.size());
    Matrix act = inputs;
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        const auto& layer = params.layers[i];
        Matrix z = act * weights_of(layer);
        z.rowwise() += bias_of(layer);
        if (i + 1 < params.layers.size()) {
            act = z.cwiseMax(0.0);
        }
        pre.push_back(std::move(z));
    }
    return pre;
}

double mean_loss(const Vector& logits, const Vector& targets) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
        total += bce_from_logit(logits(i), targets(i));
    }
    return total / static_cast<double>(logits.size());
}

double batch_loss(const MlpParams& params, const Batch& batch) {
    const auto pre = forward_pass(params, batch.inputs);
    return mean_loss(pre.back().col(0), batch.targets);
}

// Accumulates d(mean BCE)/d(params) into `grad` (same shapes as params, assumed zeroed).
void backward(const MlpParams& params, const Eigen::Ref<const Matrix>& inputs,
              const Eigen::Ref<const Vector>& targets, MlpParams& grad) {
    const auto pre = forward_pass(params, inputs);
    const auto n = static_cast<double>(inputs.rows());
    Matrix delta(inputs.rows(), 1);
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
        delta(i, 0) = (sigmoid(pre.back()(i, 0)) - targets(i)) / n;
    }
    for (std::size_t k = params.layers.size(); k-- > 0;) {
        const auto& layer = params.layers[k];
        auto& g = grad.layers[k];
        MatrixMap gw(g.weights.data(), g.fan_in, g.fan_out);
        Eigen::Map<RowVector> gb(g.bias.data(), g.fan_out);
        if (k == 0) {
            gw.noalias() += inputs.transpose() * delta;
        } else {
            gw.noalias() += pre[k - 1].cwiseMax(0.0).transpose() * delta;
        }
        gb += delta.colwise().sum();
        if (k > 0) {
            Matrix upstream = delta * weights_of(layer).transpose();
            delta = upstream.cwiseProduct((pre[k - 1].array() > 0.0).cast<double>().matrix());
        }
    }
}

MlpParams zeros_like(const MlpParams& params) {
    MlpParams z = params;
    for (auto& l : z.layers) {
        std::fill(l.weights.begin(), l.weights.end(), 0.0);
        std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    return z;
}

class Adam {
  public:
    Adam(const MlpParams& shape, double lr) : lr_(lr), m_(zeros_like(shape)), v_(zeros_like(shape)) {}

    void step(MlpParams& params, const MlpParams& grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(kBeta1, t_);
        const double c2 = 1.0 - std::pow(kBeta2, t_);
        for (std::size_t k = 0; k < params.layers.size(); ++k) {
            update(params.layers[k].weights, grad.layers[k].weights, m_.layers[k].weights,
                   v_.layers[k].weights, c1, c2);
            update(params.layers[k].bias, grad.layers[k].bias, m_.layers[k].bias,
                   v_.layers[k].bias, c1, c2);
        }
    }

  private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;

    void update(ParamVector& p, const ParamVector& g, ParamVector& m, ParamVector& v, double c1,
                double c2) const {
        const auto n = static_cast<Eigen::Index>(p.size());
        Eigen::Map<Vector> pp(p.data(), n);
        Eigen::Map<const Vector> gg(g.data(), n);
        Eigen::Map<Vector> mm(m.data(), n);
        Eigen::Map<Vector> vv(v.data(), n);
        mm = kBeta1 * mm + (1.0 - kBeta1) * gg;
        vv = kBeta2 * vv + (1.0 - kBeta2) * gg.cwiseProduct(gg);
        pp.array() -= lr_ * (mm.array() / c1) / ((vv.array() / c2).sqrt() + kEps);
    }

    double lr_;
    int t_ = 0;
    MlpParams m_;
    MlpParams v_;
};

template <typename T>
void put(std::ostream& out, T value) {
    static_assert(std::endian::native == std::endian::little, "serialization assumes little-endian");
    out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof value);
    if (!in) {
        throw Error(ErrorCode::IoError, "truncated classifier file");
    }
    return value;
}

constexpr char kMagic[6] = {'A', 'C', 'M', 'L', 'P', '1'};

} // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || batch_size < 1 || max_epochs < 1 || patience < 1) {
        throw Error(ErrorCode::InvalidConfig, "train config values must be positive");
    }
    for (int h : hidden) {
        if (h < 1) throw Error(ErrorCode::InvalidConfig, "hidden layer widths must be positive");
    }
}

bool EarlyStopping::update(double val_loss) {
    if (val_loss < best_) {
        best_ = val_loss;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

MlpParams init_mlp(std::uint64_t seed, const std::vector<int>& layer_dims) {
    if (layer_dims.size() < 2 || layer_dims.back() != 1 ||
        std::any_of(layer_dims.begin(), layer_dims.end(), [](int d) { return d < 1; })) {
        throw Error(ErrorCode::ShapeError, "invalid layer dimensions");
    }
    std::mt19937_64 rng(seed);
    MlpParams params;
    params.layer_dims = layer_dims;
    for (std::size_t i = 0; i + 1 < layer_dims.size(); ++i) {
        DenseLayer layer;
        layer.fan_in = layer_dims[i];
        layer.fan_out = layer_dims[i + 1];
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / layer.fan_in));
        layer.weights.resize(static_cast<std::size_t>(layer.fan_in) * layer.fan_out);
        for (auto& w : layer.weights) w = dist(rng);
        layer.bias.assign(static_cast<std::size_t>(layer.fan_out), 0.0);
        params.layers.push_back(std::move(layer));
    }
    return params;
}

double forward(const MlpParams& params, std::span<const double> input) {
    check_shapes(params);
    if (input.size() != static_cast<std::size_t>(params.layer_dims.front())) {
        throw Error(ErrorCode::ShapeError, "input has " + std::to_string(input.size()) +
                                               " values, classifier expects " +
                                               std::to_string(params.layer_dims.front()));
    }
    RowVector act = Eigen::Map<const RowVector>(input.data(), static_cast<Eigen::Index>(input.size()));
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        RowVector z = act * weights_of(params.layers[i]) + bias_of(params.layers[i]);
        act = i + 1 < params.layers.size() ? RowVector(z.cwiseMax(0.0)) : z;
    }
    return sigmoid(act(0));
}

double forward(const MlpParams& params, const Crop& crop) { return forward(params, crop.patch); }

double bce_loss(const MlpParams& params, std::span<const Crop> crops) {
    check_shapes(params);
    if (crops.empty()) throw Error(ErrorCode::EmptyDataset, "no crops");
    return batch_loss(params, to_batch(crops, params.layer_dims.front()));
}

MlpParams bce_gradient(const MlpParams& params, std::span<const Crop> crops) {
    check_shapes(params);
    if (crops.empty()) throw Error(ErrorCode::EmptyDataset, "no crops");
    const Batch batch = to_batch(crops, params.layer_dims.front());
    MlpParams grad = zeros_like(params);
    backward(params, batch.inputs, batch.targets, grad);
    return grad;
}

std::pair<MlpParams, TrainReport> train_classifier(std::span<const Crop> train_crops,
                                                   std::span<const Crop> val_crops,
                                                   const TrainConfig& config) {
    config.validate();
    if (train_crops.empty() || val_crops.empty()) {
        throw Error(ErrorCode::EmptyDataset, "training and validation crops must be nonempty");
    }
    std::vector<int> dims{static_cast<int>(train_crops.front().patch.size())};
    dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
    dims.push_back(1);
    return train_classifier(init_mlp(config.seed, dims), train_crops, val_crops, config);
}

std::pair<MlpParams, TrainReport> train_classifier(MlpParams params,
                                                   std::span<const Crop> train_crops,
                                                   std::span<const Crop> val_crops,
                                                   const TrainConfig& config) {
    config.validate();
    check_shapes(params);
    if (train_crops.empty() || val_crops.empty()) {
        throw Error(ErrorCode::EmptyDataset, "training and validation crops must be nonempty");
    }
    const int input_dim = params.layer_dims.front();
    const Batch train = to_batch(train_crops, input_dim);
    const Batch val = to_batch(val_crops, input_dim);
    const auto n = static_cast<Eigen::Index>(train_crops.size());

    // Shuffling uses its own stream so it does not depend on how init consumed the seed.
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    Adam adam(params, config.learning_rate);
    EarlyStopping stopper(config.patience);
    TrainReport report;
    MlpParams best = params;
    MlpParams grad = zeros_like(params);
    Matrix xb;
    Vector yb;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += config.batch_size) {
            const Eigen::Index len = std::min<Eigen::Index>(config.batch_size, n - start);
            xb.resize(len, input_dim);
            yb.resize(len);
            for (Eigen::Index i = 0; i < len; ++i) {
                const auto src = order[static_cast<std::size_t>(start + i)];
                xb.row(i) = train.inputs.row(src);
                yb(i) = train.targets(src);
            }
            for (auto& l : grad.layers) {
                std::fill(l.weights.begin(), l.weights.end(), 0.0);
                std::fill(l.bias.begin(), l.bias.end(), 0.0);
            }
            backward(params, xb, yb, grad);
            adam.step(params, grad);
        }

        const double train_loss = batch_loss(params, train);
        const double val_loss = batch_loss(params, val);
        if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
            throw Error(ErrorCode::DivergedTraining, "loss became non-finite at epoch " +
                                                         std::to_string(epoch));
        }
        report.loss_curve.push_back({train_loss, val_loss});
        report.epochs_run = epoch;
        if (stopper.update(val_loss)) {
            best = params;
            report.best_epoch = epoch;
            report.best_val_loss = val_loss;
        }
        if (stopper.should_stop()) {
            report.stopped_early = true;
            break;
        }
    }
    return {std::move(best), std::move(report)};
}

CropLabel predict(const MlpParams& params, const Crop& crop) {
    return forward(params, crop) >= 0.5 ? CropLabel::RealCell : CropLabel::NotCell;
}

void save_params(const std::filesystem::path& path, const MlpParams& params) {
    check_shapes(params);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    out.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(params.layer_dims.size()));
    for (int d : params.layer_dims) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (const auto& l : params.layers) {
        for (double w : l.weights) put<double>(out, w);
        for (double b : l.bias) put<double>(out, b);
    }
    if (!out) {
        throw Error(ErrorCode::IoError, "short write to " + path.string());
    }
}

MlpParams load_params(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    char magic[sizeof kMagic];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw Error(ErrorCode::IoError, path.string() + " is not a classifier file");
    }
    const auto n_dims = get<std::uint32_t>(in);
    if (n_dims < 2 || n_dims > 64) {
        throw Error(ErrorCode::IoError, "implausible layer count in " + path.string());
    }
    MlpParams params;
    for (std::uint32_t i = 0; i < n_dims; ++i) {
        const auto d = get<std::uint32_t>(in);
        if (d == 0 || d > (1u << 20)) throw Error(ErrorCode::IoError, "implausible layer width");
        params.layer_dims.push_back(static_cast<int>(d));
    }
    for (std::size_t i = 0; i + 1 < params.layer_dims.size(); ++i) {
        DenseLayer l;
        l.fan_in = params.layer_dims[i];
        l.fan_out = params.layer_dims[i + 1];
        l.weights.resize(static_cast<std::size_t>(l.fan_in) * l.fan_out);
        l.bias.resize(static_cast<std::size_t>(l.fan_out));
        for (auto& w : l.weights) w = get<double>(in);
        for (auto& b : l.bias) b = get<double>(in);
        params.layers.push_back(std::move(l));
    }
    check_shapes(params);
    for (const auto& l : params.layers) {
        const auto finite = [](double v) { return std::isfinite(v); };
        if (!std::all_of(l.weights.begin(), l.weights.end(), finite) ||
            !std::all_of(l.bias.begin(), l.bias.end(), finite)) {
            throw Error(ErrorCode::IoError, "classifier file holds non-finite values");
        }
    }
    return params;
}

} // namespace accdor
