#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssd/filters.hpp"
#include "ssd/image.hpp"

namespace ssd {

struct TensorShape {
    std::size_t height = 1;
    std::size_t width = 1;
    std::size_t channels = 1;

    std::size_t size() const noexcept { return height * width * channels; }
    friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

enum class LayerKind : std::uint32_t { Conv3x3 = 1, ReLU = 2, MaxPool2 = 3, Flatten = 4, Dense = 5, Softmax = 6 };

std::string_view to_string(LayerKind k) noexcept;

/// One layer with its parameters. Conv weights are laid out
/// [out][ky][kx][in]; dense weights [out][in]. Convolutions use zero
/// "same" padding; max pooling is 2x2 with stride 2.
struct Layer {
    LayerKind kind{};
    TensorShape in;
    TensorShape out;
    std::vector<double> weights;
    std::vector<double> bias;

    bool spatial_output() const noexcept {
        return kind == LayerKind::Conv3x3 || kind == LayerKind::ReLU || kind == LayerKind::MaxPool2;
    }
    friend bool operator==(const Layer&, const Layer&) = default;
};

/// Feed-forward classifier over H x W x C images. Activations are carried
/// as Image values (dense outputs are 1 x 1 x N).
class Model {
public:
    Model() = default;

    /// Conv(8)-ReLU-MaxPool-Conv(16)-ReLU-MaxPool-Dense-Softmax.
    static Model default_cnn(TensorShape input, std::size_t num_classes, std::uint64_t seed);
    /// Flatten-Dense-Softmax; a linear softmax classifier.
    static Model dense_only(TensorShape input, std::size_t num_classes, std::uint64_t seed);

    const TensorShape& input_shape() const noexcept { return input_; }
    std::size_t num_classes() const noexcept { return num_classes_; }
    std::uint64_t seed() const noexcept { return seed_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    std::vector<Layer>& mutable_layers() noexcept { return layers_; }
    std::size_t parameter_count() const noexcept;

    /// Hex digest of the serialized model.
    std::string fingerprint() const;

    friend bool operator==(const Model&, const Model&) = default;

private:
    friend Model decode_model(std::span<const unsigned char> bytes);
    void add(LayerKind kind, std::size_t out_units = 0);
    void initialize(std::uint64_t seed);

    TensorShape input_;
    std::size_t num_classes_ = 0;
    std::uint64_t seed_ = 0;
    std::vector<Layer> layers_;
};

struct Prediction {
    int label = 0;
    double confidence = 0.0;
    std::vector<double> probabilities;

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Argmax with ties broken by the lowest index.
Prediction make_prediction(std::vector<double> probabilities);

enum class Split { Train, Test };

struct Dataset {
    std::vector<Image> images;
    std::vector<int> labels;
    Split split = Split::Train;
    std::size_t num_classes = 10;

    std::size_t size() const noexcept { return images.size(); }
    bool empty() const noexcept { return images.empty(); }
    /// Throws ConfigError unless lengths match and labels are in range.
    void validate() const;
    Dataset head(std::size_t n) const;
};

/// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
/// limit == 0 reads everything.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels, Split split,
                 std::size_t limit = 0);

/// Seeded 28x28 grayscale shapes (eight classes), usable without any download.
Dataset synthetic_shapes(std::size_t count, std::uint64_t seed, Split split);

// Inference

/// acts[0] is the input; acts[i + 1] is the output of layer i.
std::vector<Image> forward_trace(const Model& model, const Image& img);
Prediction predict(const Model& model, const Image& img);

struct LossGradient {
    double loss = 0.0;
    Image grad;
};

/// Cross-entropy of the forward pass and its exact gradient w.r.t. the input.
LossGradient loss_and_input_gradient(const Model& model, const Image& img, int label);

/// Runs the forward pass, smooths the activation produced by layer
/// `layer_index` channel-wise (each channel min-max normalized to [0,1] for
/// the filter, then mapped back), and finishes the pass.
Prediction forward_with_layer_smoothing(const Model& model, const Image& img, std::size_t layer_index,
                                        const SmootherSpec& spec);

double accuracy(const Model& model, const Dataset& data, unsigned workers = 1);

// Training

struct TrainConfig {
    std::string architecture = "cnn"; // "cnn" or "dense"
    int epochs = 15;
    double learning_rate = 0.02;
    double momentum = 0.9;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
};

/// Mini-batch SGD on cross-entropy. Single-threaded and fully determined by
/// config.seed (initialization and shuffle order).
Model train(const Dataset& train_set, const TrainConfig& config, TrainReport* report = nullptr,
            const Dataset* test_set = nullptr);

// Persistence: "SSMD1", u32 version, header, layer descriptors, LE f64 parameters.

std::vector<unsigned char> encode_model(const Model& model);
Model decode_model(std::span<const unsigned char> bytes);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

} // namespace ssd
