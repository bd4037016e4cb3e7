#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <new>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace accdor {

enum class CropLabel { NotCell = 0, RealCell = 1, Unlabeled = 2 };

/// A fixed-size patch cut around a candidate box, intensities scaled to [0, 1].
struct Crop {
    int height = 0;
    int width = 0;
    std::vector<double> patch; // row-major, height * width
    CropLabel label = CropLabel::Unlabeled;
};

/// Cache-line aligned storage, so vectorised arithmetic over parameters takes
/// the same path (and rounds the same way) wherever the buffer lands.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlign{64};

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlign)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlign); }

    template <typename U>
    friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept {
        return true;
    }
};

using ParamVector = std::vector<double, AlignedAllocator<double>>;

/// Fully connected layer; weights are fan_in x fan_out, row-major.
struct DenseLayer {
    int fan_in = 0;
    int fan_out = 0;
    ParamVector weights;
    ParamVector bias;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Rectifier hidden layers, logistic output unit.
struct MlpParams {
    std::vector<int> layer_dims;
    std::vector<DenseLayer> layers;

    friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

inline const std::vector<int> kDefaultLayerDims{400, 512, 128, 64, 1};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 64;
    int max_epochs = 500;
    int patience = 30;
    std::uint64_t seed = 0;
    std::vector<int> hidden{512, 128, 64};

    void validate() const;
};

struct EpochLoss {
    double train = 0.0;
    double val = 0.0;
};

struct TrainReport {
    int epochs_run = 0;
    int best_epoch = 0; // 1-based
    double best_val_loss = std::numeric_limits<double>::infinity();
    std::vector<EpochLoss> loss_curve;
    bool stopped_early = false;
};

/// Tracks the best validation loss; a non-strict improvement counts as no improvement.
class EarlyStopping {
  public:
    explicit EarlyStopping(int patience) : patience_(patience) {}

    /// Returns true when `val_loss` is a new best.
    bool update(double val_loss);
    bool should_stop() const noexcept { return since_best_ >= patience_; }
    double best() const noexcept { return best_; }

  private:
    int patience_;
    int since_best_ = 0;
    double best_ = std::numeric_limits<double>::infinity();
};

/// Scaled normal weights (variance 2 / fan_in), zero biases.
MlpParams init_mlp(std::uint64_t seed, const std::vector<int>& layer_dims = kDefaultLayerDims);

/// Probability of "real cell". Throws ShapeError when the input size mismatches.
double forward(const MlpParams& params, std::span<const double> input);
double forward(const MlpParams& params, const Crop& crop);

/// Mean binary cross-entropy over labelled crops.
double bce_loss(const MlpParams& params, std::span<const Crop> crops);

/// Gradient of bce_loss, laid out like the parameters.
MlpParams bce_gradient(const MlpParams& params, std::span<const Crop> crops);

std::pair<MlpParams, TrainReport> train_classifier(std::span<const Crop> train_crops,
                                                   std::span<const Crop> val_crops,
                                                   const TrainConfig& config);

/// Same, starting from the given parameters instead of init_mlp(config.seed).
std::pair<MlpParams, TrainReport> train_classifier(MlpParams initial,
                                                   std::span<const Crop> train_crops,
                                                   std::span<const Crop> val_crops,
                                                   const TrainConfig& config);

/// RealCell iff forward >= 0.5.
CropLabel predict(const MlpParams& params, const Crop& crop);

// "ACMLP1", u32 layer count + u32 dims, then per layer f64 weights (row-major) and biases. Little-endian.
void save_params(const std::filesystem::path& path, const MlpParams& params);
MlpParams load_params(const std::filesystem::path& path);

} // namespace accdor
