// Dense feed-forward networks with reverse-mode gradients
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rwctl {

enum class Activation : std::uint8_t { Identity = 0, Relu = 1, Tanh = 2 };

std::string to_string(Activation a);

/// Fully connected network. Batches are column-major: one sample per column.
///
/// All weights and biases live in one flat parameter vector, layer by layer,
/// weights (column-major, out x in) followed by biases. Gradients use the same
/// layout, so optimizers and target tracking work on plain vectors.
template <typename Scalar>
class DenseNet {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    struct Cache {
        std::vector<Matrix> inputs;  // input to each layer
        std::vector<Matrix> pre;     // pre-activation of each layer
        Matrix output;
        const DenseNet *owner = nullptr;
        std::uint64_t generation = 0;
    };

    struct Gradients {
        Vector params;  // flat, same layout as parameters()
        Matrix input;   // d/d input, one column per sample
    };

    DenseNet() = default;
    /// sizes = {input, hidden..., output}; at least one layer.
    DenseNet(std::vector<int> sizes, Activation hidden, Activation output);

    /// Weights and biases uniform in +-1/sqrt(fan_in); the last layer is
    /// additionally scaled by `last_layer_scale`.
    void init_uniform(std::mt19937_64 &rng, Scalar last_layer_scale = Scalar(1));

    /// Throws std::invalid_argument on an input size mismatch.
    [[nodiscard]] Matrix forward(const Matrix &x) const;
    Matrix forward(const Matrix &x, Cache &cache) const;
    [[nodiscard]] Vector forward_one(const Vector &x) const;

    /// Gradients of sum(output .* output_grad). Throws std::logic_error on a
    /// cache from another network or from before a parameter update.
    [[nodiscard]] Gradients backward(const Cache &cache, const Matrix &output_grad) const;
    /// Input gradient only; skips the parameter gradients.
    [[nodiscard]] Matrix input_gradient(const Cache &cache, const Matrix &output_grad) const;

    [[nodiscard]] const std::vector<int> &sizes() const { return sizes_; }
    [[nodiscard]] int input_size() const { return sizes_.front(); }
    [[nodiscard]] int output_size() const { return sizes_.back(); }
    [[nodiscard]] int layer_count() const { return static_cast<int>(sizes_.size()) - 1; }
    [[nodiscard]] Activation hidden_activation() const { return hidden_; }
    [[nodiscard]] Activation output_activation() const { return output_act_; }

    [[nodiscard]] const Vector &parameters() const { return params_; }
    /// Mutable access invalidates outstanding caches.
    Vector &mutable_parameters();
    [[nodiscard]] Eigen::Index parameter_count() const { return params_.size(); }

    [[nodiscard]] Eigen::Map<const Matrix> weight(int layer) const;
    [[nodiscard]] Eigen::Map<const Vector> bias(int layer) const;
    Eigen::Map<Matrix> weight(int layer);
    Eigen::Map<Vector> bias(int layer);

    /// target <- (1 - tau) target + tau * this
    void polyak_into(DenseNet &target, Scalar tau) const;

    [[nodiscard]] bool same_shape(const DenseNet &other) const;

private:
    [[nodiscard]] Activation activation_of(int layer) const;
    void check_cache(const Cache &cache) const;

    std::vector<int> sizes_;
    std::vector<Eigen::Index> offsets_;  // start of each layer's weights
    Activation hidden_ = Activation::Relu;
    Activation output_act_ = Activation::Identity;
    Vector params_;
    std::uint64_t generation_ = 0;
};

/// Adaptive-moment optimizer state for one network.
template <typename Scalar>
struct AdamState {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    double learning_rate = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    Vector m;
    Vector v;

    AdamState() = default;
    AdamState(Eigen::Index n, double lr) : learning_rate(lr), m(Vector::Zero(n)), v(Vector::Zero(n)) {}
};

/// One bias-corrected Adam update of `params` in place. Throws
/// TrainingDiverged on non-finite gradients (parameters untouched).
template <typename Scalar>
void adam_step(AdamState<Scalar> &opt,
               Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> params,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &grads);

template <typename Scalar>
void adam_step(AdamState<Scalar> &opt, DenseNet<Scalar> &net,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &grads);

extern template class DenseNet<float>;
extern template class DenseNet<double>;

}  // namespace rwctl
