#include "ssd/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bytes.hpp"
#include "ssd/error.hpp"
#include "ssd/parallel.hpp"
#include "ssd/rng.hpp"

namespace ssd {

namespace {

constexpr std::string_view kModelMagic = "SSMD1";
constexpr std::uint32_t kModelVersion = 1;

Image make_tensor(const TensorShape& s) { return Image(s.height, s.width, s.channels); }

std::string shape_str(const TensorShape& s) {
    return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" + std::to_string(s.channels);
}

void check_input(const Model& model, const Image& img) {
    const auto& s = model.input_shape();
    if (img.height() != s.height || img.width() != s.width || img.channels() != s.channels) {
        throw ShapeError("input is " + std::to_string(img.height()) + "x" + std::to_string(img.width()) + "x" +
                         std::to_string(img.channels()) + " but the model expects " + shape_str(s));
    }
}

// ---------------------------------------------------------------------------
// Layer kernels

void conv_forward(const Layer& L, const Image& in, Image& out) {
    const std::size_t h = L.in.height, w = L.in.width, ic = L.in.channels, oc = L.out.channels;
    std::vector<double> acc(oc);
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            std::copy(L.bias.begin(), L.bias.end(), acc.begin());
            for (int ky = 0; ky < 3; ++ky) {
                const auto rr = static_cast<std::ptrdiff_t>(r) + ky - 1;
                if (rr < 0 || rr >= static_cast<std::ptrdiff_t>(h)) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const auto cc = static_cast<std::ptrdiff_t>(c) + kx - 1;
                    if (cc < 0 || cc >= static_cast<std::ptrdiff_t>(w)) continue;
                    const double* src = &in.data()[in.index(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc), 0)];
                    for (std::size_t o = 0; o < oc; ++o) {
                        const double* wt = &L.weights[((o * 3 + ky) * 3 + kx) * ic];
                        double s = 0.0;
                        for (std::size_t i = 0; i < ic; ++i) s += wt[i] * src[i];
                        acc[o] += s;
                    }
                }
            }
            std::copy(acc.begin(), acc.end(), &out.data()[out.index(r, c, 0)]);
        }
    }
}

void conv_backward(const Layer& L, const Image& in, const Image& dout, Image* din, double* dw, double* db) {
    const std::size_t h = L.in.height, w = L.in.width, ic = L.in.channels, oc = L.out.channels;
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
            const double* g = &dout.data()[dout.index(r, c, 0)];
            if (db) {
                for (std::size_t o = 0; o < oc; ++o) db[o] += g[o];
            }
            for (int ky = 0; ky < 3; ++ky) {
                const auto rr = static_cast<std::ptrdiff_t>(r) + ky - 1;
                if (rr < 0 || rr >= static_cast<std::ptrdiff_t>(h)) continue;
                for (int kx = 0; kx < 3; ++kx) {
                    const auto cc = static_cast<std::ptrdiff_t>(c) + kx - 1;
                    if (cc < 0 || cc >= static_cast<std::ptrdiff_t>(w)) continue;
                    const std::size_t at = in.index(static_cast<std::size_t>(rr), static_cast<std::size_t>(cc), 0);
                    const double* src = &in.data()[at];
                    double* dsrc = din ? &din->data()[at] : nullptr;
                    for (std::size_t o = 0; o < oc; ++o) {
                        const double go = g[o];
                        if (go == 0.0) continue;
                        const std::size_t base = ((o * 3 + ky) * 3 + kx) * ic;
                        if (dw) {
                            for (std::size_t i = 0; i < ic; ++i) dw[base + i] += go * src[i];
                        }
                        if (dsrc) {
                            for (std::size_t i = 0; i < ic; ++i) dsrc[i] += go * L.weights[base + i];
                        }
                    }
                }
            }
        }
    }
}

void pool_forward(const Layer& L, const Image& in, Image& out) {
    for (std::size_t r = 0; r < L.out.height; ++r) {
        for (std::size_t c = 0; c < L.out.width; ++c) {
            for (std::size_t ch = 0; ch < L.out.channels; ++ch) {
                double m = in(2 * r, 2 * c, ch);
                m = std::max({m, in(2 * r, 2 * c + 1, ch), in(2 * r + 1, 2 * c, ch), in(2 * r + 1, 2 * c + 1, ch)});
                out(r, c, ch) = m;
            }
        }
    }
}

void pool_backward(const Layer& L, const Image& in, const Image& dout, Image& din) {
    for (std::size_t r = 0; r < L.out.height; ++r) {
        for (std::size_t c = 0; c < L.out.width; ++c) {
            for (std::size_t ch = 0; ch < L.out.channels; ++ch) {
                // route to the first maximal element in scan order
                std::size_t br = 2 * r, bc = 2 * c;
                double best = in(br, bc, ch);
                for (std::size_t dr = 0; dr < 2; ++dr) {
                    for (std::size_t dc = 0; dc < 2; ++dc) {
                        if (in(2 * r + dr, 2 * c + dc, ch) > best) {
                            best = in(2 * r + dr, 2 * c + dc, ch);
                            br = 2 * r + dr;
                            bc = 2 * c + dc;
                        }
                    }
                }
                din(br, bc, ch) += dout(r, c, ch);
            }
        }
    }
}

void dense_forward(const Layer& L, const Image& in, Image& out) {
    const std::size_t n = L.in.size();
    const auto x = in.data();
    for (std::size_t o = 0; o < L.out.channels; ++o) {
        const double* wt = &L.weights[o * n];
        double s = L.bias[o];
        for (std::size_t i = 0; i < n; ++i) s += wt[i] * x[i];
        out.data()[o] = s;
    }
}

void dense_backward(const Layer& L, const Image& in, const Image& dout, Image* din, double* dw, double* db) {
    const std::size_t n = L.in.size();
    const auto x = in.data();
    for (std::size_t o = 0; o < L.out.channels; ++o) {
        const double g = dout.data()[o];
        if (db) db[o] += g;
        if (g == 0.0) continue;
        const double* wt = &L.weights[o * n];
        if (dw) {
            double* gw = dw + o * n;
            for (std::size_t i = 0; i < n; ++i) gw[i] += g * x[i];
        }
        if (din) {
            auto dx = din->data();
            for (std::size_t i = 0; i < n; ++i) dx[i] += g * wt[i];
        }
    }
}

void softmax_forward(const Image& in, Image& out) {
    const auto x = in.data();
    const double m = *std::max_element(x.begin(), x.end());
    double sum = 0.0;
    auto y = out.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = std::exp(x[i] - m);
        sum += y[i];
    }
    for (double& v : y) v /= sum;
}

Image layer_forward(const Layer& L, const Image& in) {
    switch (L.kind) {
    case LayerKind::Conv3x3: {
        Image out = make_tensor(L.out);
        conv_forward(L, in, out);
        return out;
    }
    case LayerKind::ReLU: {
        Image out = in;
        for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
        return out;
    }
    case LayerKind::MaxPool2: {
        Image out = make_tensor(L.out);
        pool_forward(L, in, out);
        return out;
    }
    case LayerKind::Flatten: return Image(1, 1, L.out.channels, in.values());
    case LayerKind::Dense: {
        Image out = make_tensor(L.out);
        dense_forward(L, in, out);
        return out;
    }
    case LayerKind::Softmax: {
        Image out = make_tensor(L.out);
        softmax_forward(in, out);
        return out;
    }
    }
    throw Error(ErrorCode::Internal, "unknown layer kind");
}

struct ParamGrads {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;

    explicit ParamGrads(const Model& m) {
        for (const auto& L : m.layers()) {
            weights.emplace_back(L.weights.size(), 0.0);
            bias.emplace_back(L.bias.size(), 0.0);
        }
    }
    void zero() {
        for (auto& v : weights) std::fill(v.begin(), v.end(), 0.0);
        for (auto& v : bias) std::fill(v.begin(), v.end(), 0.0);
    }
};

double cross_entropy(const Image& logits, int label) {
    const auto x = logits.data();
    const double m = *std::max_element(x.begin(), x.end());
    double sum = 0.0;
    for (double v : x) sum += std::exp(v - m);
    return m + std::log(sum) - x[static_cast<std::size_t>(label)];
}

// Backpropagates cross-entropy through every layer. acts comes from
// forward_trace; the last layer must be Softmax.
Image backward(const Model& model, const std::vector<Image>& acts, int label, ParamGrads* grads, bool want_input) {
    const auto& layers = model.layers();
    const std::size_t n = layers.size();
    Image grad = acts[n]; // d loss / d logits = p - onehot
    grad.data()[static_cast<std::size_t>(label)] -= 1.0;

    for (std::size_t li = n - 1; li-- > 0;) {
        const Layer& L = layers[li];
        const Image& in = acts[li];
        const bool need_din = li > 0 || want_input;
        double* dw = grads ? grads->weights[li].data() : nullptr;
        double* db = grads ? grads->bias[li].data() : nullptr;
        switch (L.kind) {
        case LayerKind::Conv3x3: {
            Image din = make_tensor(L.in);
            conv_backward(L, in, grad, need_din ? &din : nullptr, dw, db);
            grad = std::move(din);
            break;
        }
        case LayerKind::ReLU: {
            auto g = grad.data();
            const auto x = in.data();
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (!(x[i] > 0.0)) g[i] = 0.0;
            }
            break;
        }
        case LayerKind::MaxPool2: {
            Image din = make_tensor(L.in);
            pool_backward(L, in, grad, din);
            grad = std::move(din);
            break;
        }
        case LayerKind::Flatten: grad = Image(L.in.height, L.in.width, L.in.channels, grad.values()); break;
        case LayerKind::Dense: {
            Image din = make_tensor(L.in);
            dense_backward(L, in, grad, need_din ? &din : nullptr, dw, db);
            grad = std::move(din);
            break;
        }
        case LayerKind::Softmax: throw Error(ErrorCode::Internal, "softmax must be the final layer");
        }
    }
    return grad;
}

} // namespace

std::string_view to_string(LayerKind k) noexcept {
    switch (k) {
    case LayerKind::Conv3x3: return "conv3x3";
    case LayerKind::ReLU: return "relu";
    case LayerKind::MaxPool2: return "maxpool2";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Dense: return "dense";
    case LayerKind::Softmax: return "softmax";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Model

void Model::add(LayerKind kind, std::size_t out_units) {
    if (!layers_.empty() && layers_.back().kind == LayerKind::Softmax) {
        throw ShapeError("no layer may follow softmax");
    }
    Layer L;
    L.kind = kind;
    L.in = layers_.empty() ? input_ : layers_.back().out;
    switch (kind) {
    case LayerKind::Conv3x3:
        if (L.in.height * L.in.width == 1 && !layers_.empty()) throw ShapeError("conv3x3 needs a spatial input");
        if (out_units == 0) throw ShapeError("conv3x3 needs at least one filter");
        L.out = {L.in.height, L.in.width, out_units};
        L.weights.assign(out_units * 9 * L.in.channels, 0.0);
        L.bias.assign(out_units, 0.0);
        break;
    case LayerKind::ReLU: L.out = L.in; break;
    case LayerKind::MaxPool2:
        if (L.in.height < 2 || L.in.width < 2) throw ShapeError("maxpool2 input is smaller than 2x2");
        L.out = {L.in.height / 2, L.in.width / 2, L.in.channels};
        break;
    case LayerKind::Flatten: L.out = {1, 1, L.in.size()}; break;
    case LayerKind::Dense:
        if (out_units == 0) throw ShapeError("dense needs at least one output");
        L.out = {1, 1, out_units};
        L.weights.assign(out_units * L.in.size(), 0.0);
        L.bias.assign(out_units, 0.0);
        break;
    case LayerKind::Softmax:
        if (L.in.size() != num_classes_) {
            throw ShapeError("softmax width " + std::to_string(L.in.size()) + " does not match " +
                             std::to_string(num_classes_) + " classes");
        }
        L.out = L.in;
        break;
    default: throw ShapeError("unknown layer kind");
    }
    layers_.push_back(std::move(L));
}

void Model::initialize(std::uint64_t seed) {
    seed_ = seed;
    Rng rng(seed);
    for (auto& L : layers_) {
        std::size_t fan_in = 0, fan_out = 0;
        if (L.kind == LayerKind::Conv3x3) {
            fan_in = 9 * L.in.channels;
            fan_out = 9 * L.out.channels;
        } else if (L.kind == LayerKind::Dense) {
            fan_in = L.in.size();
            fan_out = L.out.channels;
        } else {
            continue;
        }
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& w : L.weights) w = rng.uniform(-limit, limit);
        std::fill(L.bias.begin(), L.bias.end(), 0.0);
    }
}

Model Model::default_cnn(TensorShape input, std::size_t num_classes, std::uint64_t seed) {
    Model m;
    m.input_ = input;
    m.num_classes_ = num_classes;
    m.add(LayerKind::Conv3x3, 8);
    m.add(LayerKind::ReLU);
    m.add(LayerKind::MaxPool2);
    m.add(LayerKind::Conv3x3, 16);
    m.add(LayerKind::ReLU);
    m.add(LayerKind::MaxPool2);
    m.add(LayerKind::Flatten);
    m.add(LayerKind::Dense, num_classes);
    m.add(LayerKind::Softmax);
    m.initialize(seed);
    return m;
}

Model Model::dense_only(TensorShape input, std::size_t num_classes, std::uint64_t seed) {
    Model m;
    m.input_ = input;
    m.num_classes_ = num_classes;
    m.add(LayerKind::Flatten);
    m.add(LayerKind::Dense, num_classes);
    m.add(LayerKind::Softmax);
    m.initialize(seed);
    return m;
}

std::size_t Model::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& L : layers_) n += L.weights.size() + L.bias.size();
    return n;
}

std::string Model::fingerprint() const { return detail::fnv1a_hex(encode_model(*this)); }

Prediction make_prediction(std::vector<double> probabilities) {
    Prediction p;
    std::size_t best = 0;
    for (std::size_t i = 1; i < probabilities.size(); ++i) {
        if (probabilities[i] > probabilities[best]) best = i;
    }
    p.label = static_cast<int>(best);
    p.confidence = probabilities.empty() ? 0.0 : probabilities[best];
    p.probabilities = std::move(probabilities);
    return p;
}

// ---------------------------------------------------------------------------
// Inference

std::vector<Image> forward_trace(const Model& model, const Image& img) {
    check_input(model, img);
    std::vector<Image> acts;
    acts.reserve(model.layers().size() + 1);
    acts.push_back(img);
    for (const auto& L : model.layers()) acts.push_back(layer_forward(L, acts.back()));
    return acts;
}

Prediction predict(const Model& model, const Image& img) {
    check_input(model, img);
    Image cur = img;
    for (const auto& L : model.layers()) cur = layer_forward(L, cur);
    return make_prediction(cur.values());
}

LossGradient loss_and_input_gradient(const Model& model, const Image& img, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= model.num_classes()) {
        throw ShapeError("label " + std::to_string(label) + " out of range");
    }
    const auto acts = forward_trace(model, img);
    LossGradient out;
    out.loss = cross_entropy(acts[acts.size() - 2], label);
    out.grad = backward(model, acts, label, nullptr, true);
    return out;
}

Prediction forward_with_layer_smoothing(const Model& model, const Image& img, std::size_t layer_index,
                                        const SmootherSpec& spec) {
    const auto& layers = model.layers();
    if (layer_index >= layers.size()) {
        throw ParameterError("layer index " + std::to_string(layer_index) + " out of range (model has " +
                             std::to_string(layers.size()) + " layers)");
    }
    if (!layers[layer_index].spatial_output()) {
        throw ParameterError("layer " + std::to_string(layer_index) + " (" +
                             std::string(to_string(layers[layer_index].kind)) + ") has no spatial output");
    }
    check_input(model, img);
    Image cur = img;
    for (std::size_t li = 0; li < layers.size(); ++li) {
        cur = layer_forward(layers[li], cur);
        if (li != layer_index) continue;

        const std::size_t nc = cur.channels();
        std::vector<double> lo(nc, std::numeric_limits<double>::infinity());
        std::vector<double> hi(nc, -std::numeric_limits<double>::infinity());
        auto d = cur.data();
        for (std::size_t i = 0; i < d.size(); ++i) {
            lo[i % nc] = std::min(lo[i % nc], d[i]);
            hi[i % nc] = std::max(hi[i % nc], d[i]);
        }
        Image unit = cur;
        auto u = unit.data();
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double span = hi[i % nc] - lo[i % nc];
            u[i] = span > 0.0 ? (d[i] - lo[i % nc]) / span : 0.0;
        }
        const Image smoothed = apply_smoother(spec, unit);
        const auto s = smoothed.data();
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double span = hi[i % nc] - lo[i % nc];
            // constant channels pass through untouched
            if (span > 0.0) d[i] = lo[i % nc] + s[i] * span;
        }
    }
    return make_prediction(cur.values());
}

double accuracy(const Model& model, const Dataset& data, unsigned workers) {
    if (data.empty()) return 0.0;
    std::vector<char> hit(data.size(), 0);
    parallel_for(data.size(), workers, [&](std::size_t i) {
        hit[i] = predict(model, data.images[i]).label == data.labels[i] ? 1 : 0;
    });
    return static_cast<double>(std::accumulate(hit.begin(), hit.end(), std::size_t{0})) /
           static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Training

Model train(const Dataset& train_set, const TrainConfig& config, TrainReport* report, const Dataset* test_set) {
    if (train_set.empty()) throw TrainingError("training set is empty");
    train_set.validate();
    if (config.epochs < 0) throw TrainingError("epochs must be >= 0");
    if (config.batch_size == 0) throw TrainingError("batch_size must be >= 1");
    if (!(config.learning_rate > 0.0)) throw TrainingError("learning_rate must be > 0");

    const Image& first = train_set.images.front();
    const TensorShape input{first.height(), first.width(), first.channels()};
    Model model;
    if (config.architecture == "cnn") {
        model = Model::default_cnn(input, train_set.num_classes, config.seed);
    } else if (config.architecture == "dense") {
        model = Model::dense_only(input, train_set.num_classes, config.seed);
    } else {
        throw TrainingError("unknown architecture \"" + config.architecture + "\"");
    }

    ParamGrads grads(model);
    ParamGrads velocity(model);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(config.seed, 0x5eed));

    TrainReport rep;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(std::span(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            grads.zero();
            for (std::size_t k = start; k < end; ++k) {
                const std::size_t idx = order[k];
                const auto acts = forward_trace(model, train_set.images[idx]);
                epoch_loss += cross_entropy(acts[acts.size() - 2], train_set.labels[idx]);
                backward(model, acts, train_set.labels[idx], &grads, false);
            }
            if (!std::isfinite(epoch_loss)) {
                throw TrainingError("training diverged (non-finite loss) at epoch " + std::to_string(epoch));
            }
            const double scale = config.learning_rate / static_cast<double>(end - start);
            auto& layers = model.mutable_layers();
            for (std::size_t li = 0; li < layers.size(); ++li) {
                auto update = [&](std::vector<double>& p, std::vector<double>& v, const std::vector<double>& g) {
                    for (std::size_t i = 0; i < p.size(); ++i) {
                        v[i] = config.momentum * v[i] - scale * g[i];
                        p[i] += v[i];
                    }
                };
                update(layers[li].weights, velocity.weights[li], grads.weights[li]);
                update(layers[li].bias, velocity.bias[li], grads.bias[li]);
            }
        }
        rep.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    if (report) {
        rep.train_accuracy = accuracy(model, train_set, 0);
        if (test_set && !test_set->empty()) rep.test_accuracy = accuracy(model, *test_set, 0);
        *report = std::move(rep);
    }
    return model;
}

// ---------------------------------------------------------------------------
// Datasets

void Dataset::validate() const {
    if (images.size() != labels.size()) {
        throw ConfigError("dataset has " + std::to_string(images.size()) + " images but " +
                          std::to_string(labels.size()) + " labels");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
            throw ConfigError("label " + std::to_string(labels[i]) + " of sample " + std::to_string(i) +
                              " is outside [0, " + std::to_string(num_classes) + ")");
        }
        if (!images[i].same_shape(images.front())) {
            throw ConfigError("sample " + std::to_string(i) + " has a different shape from sample 0");
        }
    }
}

Dataset Dataset::head(std::size_t n) const {
    Dataset d;
    d.split = split;
    d.num_classes = num_classes;
    n = std::min(n, size());
    d.images.assign(images.begin(), images.begin() + static_cast<std::ptrdiff_t>(n));
    d.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
    return d;
}

namespace {

std::uint32_t be32(std::span<const unsigned char> bytes, std::size_t at, const std::filesystem::path& path) {
    if (at + 4 > bytes.size()) throw FormatError(path.string() + ": truncated IDX header at offset " + std::to_string(at));
    return (std::uint32_t{bytes[at]} << 24) | (std::uint32_t{bytes[at + 1]} << 16) |
           (std::uint32_t{bytes[at + 2]} << 8) | std::uint32_t{bytes[at + 3]};
}

} // namespace

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path, Split split,
                 std::size_t limit) {
    if (!std::filesystem::exists(images_path)) throw IoError("dataset file not found: " + images_path.string());
    if (!std::filesystem::exists(labels_path)) throw IoError("dataset file not found: " + labels_path.string());
    const auto ib = detail::read_file(images_path);
    const auto lb = detail::read_file(labels_path);
    if (be32(ib, 0, images_path) != 0x00000803) {
        throw FormatError(images_path.string() + ": bad IDX image magic at offset 0");
    }
    if (be32(lb, 0, labels_path) != 0x00000801) {
        throw FormatError(labels_path.string() + ": bad IDX label magic at offset 0");
    }
    const std::size_t n = be32(ib, 4, images_path);
    const std::size_t rows = be32(ib, 8, images_path);
    const std::size_t cols = be32(ib, 12, images_path);
    const std::size_t nl = be32(lb, 4, labels_path);
    if (n != nl) {
        throw FormatError("IDX count mismatch: " + std::to_string(n) + " images vs " + std::to_string(nl) + " labels");
    }
    if (ib.size() < 16 + n * rows * cols) throw FormatError(images_path.string() + ": truncated pixel data");
    if (lb.size() < 8 + n) throw FormatError(labels_path.string() + ": truncated label data");

    const std::size_t take = limit == 0 ? n : std::min(n, limit);
    Dataset d;
    d.split = split;
    d.num_classes = 10;
    d.images.reserve(take);
    d.labels.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        std::vector<double> px(rows * cols);
        const unsigned char* src = ib.data() + 16 + i * rows * cols;
        for (std::size_t k = 0; k < px.size(); ++k) px[k] = src[k] / 255.0;
        d.images.emplace_back(rows, cols, 1, std::move(px));
        d.labels.push_back(lb[8 + i]);
    }
    int max_label = 0;
    for (int l : d.labels) max_label = std::max(max_label, l);
    d.num_classes = std::max<std::size_t>(10, static_cast<std::size_t>(max_label) + 1);
    d.validate();
    return d;
}

Dataset synthetic_shapes(std::size_t count, std::uint64_t seed, Split split) {
    constexpr std::size_t kSide = 28;
    constexpr int kClasses = 8;
    Rng rng(seed);
    Dataset d;
    d.split = split;
    d.num_classes = kClasses;
    for (std::size_t n = 0; n < count; ++n) {
        const int label = static_cast<int>(rng.below(kClasses));
        const double cy = 13.5 + rng.uniform(-3.0, 3.0);
        const double cx = 13.5 + rng.uniform(-3.0, 3.0);
        const double half = rng.uniform(5.0, 9.0);
        const double ink = rng.uniform(0.7, 1.0);
        Image img(kSide, kSide, 1);
        for (std::size_t r = 0; r < kSide; ++r) {
            for (std::size_t c = 0; c < kSide; ++c) {
                const double y = static_cast<double>(r) - cy;
                const double x = static_cast<double>(c) - cx;
                const double ay = std::abs(y), ax = std::abs(x);
                const double rad = std::hypot(x, y);
                bool on = false;
                switch (label) {
                case 0: on = ax <= half && ay <= half; break;                                     // square
                case 1: on = std::max(ax, ay) <= half && std::max(ax, ay) >= half - 2.0; break;  // frame
                case 2: on = rad <= half; break;                                                  // disc
                case 3: on = rad <= half && rad >= half - 2.0; break;                             // ring
                case 4: on = ax <= half && ay <= 1.5; break;                                      // bar
                case 5: on = ay <= half && ax <= 1.5; break;                                      // column
                case 6: on = (ax <= half && ay <= 1.5) || (ay <= half && ax <= 1.5); break;       // plus
                case 7: on = std::max(ax, ay) <= half && (std::abs(x - y) <= 1.5 || std::abs(x + y) <= 1.5); break;
                }
                img(r, c) = on ? ink : rng.uniform(0.0, 0.1);
            }
        }
        d.images.push_back(std::move(img));
        d.labels.push_back(label);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Persistence

std::vector<unsigned char> encode_model(const Model& model) {
    detail::ByteWriter w;
    w.raw(kModelMagic);
    w.u32(kModelVersion);
    w.u32(static_cast<std::uint32_t>(model.input_shape().height));
    w.u32(static_cast<std::uint32_t>(model.input_shape().width));
    w.u32(static_cast<std::uint32_t>(model.input_shape().channels));
    w.u32(static_cast<std::uint32_t>(model.num_classes()));
    w.u64(model.seed());
    w.u32(static_cast<std::uint32_t>(model.layers().size()));
    for (const auto& L : model.layers()) {
        w.u32(static_cast<std::uint32_t>(L.kind));
        const std::size_t units =
            (L.kind == LayerKind::Conv3x3 || L.kind == LayerKind::Dense) ? L.out.channels : 0;
        w.u32(static_cast<std::uint32_t>(units));
        w.u64(L.weights.size());
        w.u64(L.bias.size());
    }
    for (const auto& L : model.layers()) {
        for (double v : L.weights) w.f64(v);
        for (double v : L.bias) w.f64(v);
    }
    return w.take();
}

Model decode_model(std::span<const unsigned char> bytes) {
    detail::ByteReader rd(bytes, "model");
    rd.expect(kModelMagic);
    if (const auto version = rd.u32(); version != kModelVersion) {
        rd.fail("unsupported model version " + std::to_string(version));
    }
    Model m;
    m.input_.height = rd.u32();
    m.input_.width = rd.u32();
    m.input_.channels = rd.u32();
    m.num_classes_ = rd.u32();
    m.seed_ = rd.u64();
    if (m.input_.size() == 0 || m.num_classes_ == 0) rd.fail("empty input shape or class count");
    const std::uint32_t count = rd.u32();
    if (count == 0 || count > 1024) rd.fail("implausible layer count " + std::to_string(count));
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto kind = rd.u32();
        const auto units = rd.u32();
        const auto nw = rd.u64();
        const auto nb = rd.u64();
        if (kind < 1 || kind > 6) rd.fail("unknown layer kind " + std::to_string(kind));
        try {
            m.add(static_cast<LayerKind>(kind), units);
        } catch (const ShapeError& e) {
            rd.fail(std::string("inconsistent layer: ") + e.what());
        }
        if (m.layers_.back().weights.size() != nw || m.layers_.back().bias.size() != nb) {
            rd.fail("parameter count mismatch in layer " + std::to_string(i));
        }
    }
    if (m.layers_.back().kind != LayerKind::Softmax) rd.fail("model does not end in softmax");
    for (auto& L : m.layers_) {
        for (double& v : L.weights) v = rd.f64();
        for (double& v : L.bias) v = rd.f64();
    }
    if (rd.remaining() != 0) rd.fail("trailing bytes");
    return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    detail::write_file(path, encode_model(model));
}

Model load_model(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("model file not found: " + path.string());
    const auto bytes = detail::read_file(path);
    try {
        return decode_model(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace ssd
