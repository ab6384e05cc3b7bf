#include "rwctl/dense_net.hpp"

#include <cmath>
#include <stdexcept>

#include "rwctl/error.hpp"

namespace rwctl {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
    }
    return "unknown";
}

namespace {

template <typename M>
void activate_inplace(M &z, Activation a) {
    switch (a) {
        case Activation::Identity: break;
        case Activation::Relu: z = z.cwiseMax(typename M::Scalar(0)); break;
        case Activation::Tanh: z = z.array().tanh().matrix(); break;
    }
}

// delta *= f'(pre), with `post` = f(pre) available for tanh.
template <typename M>
void scale_by_derivative(M &delta, const M &pre, const M &post, Activation a) {
    using S = typename M::Scalar;
    switch (a) {
        case Activation::Identity: break;
        case Activation::Relu:
            delta = (pre.array() > S(0)).select(delta, S(0));
            break;
        case Activation::Tanh:
            delta.array() *= (S(1) - post.array().square());
            break;
    }
}

}  // namespace

template <typename Scalar>
DenseNet<Scalar>::DenseNet(std::vector<int> sizes, Activation hidden, Activation output)
    : sizes_(std::move(sizes)), hidden_(hidden), output_act_(output) {
    if (sizes_.size() < 2) {
        throw std::invalid_argument("DenseNet needs at least an input and an output size");
    }
    Eigen::Index off = 0;
    for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
        if (sizes_[l] < 1 || sizes_[l + 1] < 1) {
            throw std::invalid_argument("DenseNet layer sizes must be >= 1");
        }
        offsets_.push_back(off);
        off += static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1] + sizes_[l + 1];
    }
    params_ = Vector::Zero(off);
}

template <typename Scalar>
void DenseNet<Scalar>::init_uniform(std::mt19937_64 &rng, Scalar last_layer_scale) {
    for (int l = 0; l < layer_count(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        const Scalar scale = l + 1 == layer_count() ? last_layer_scale : Scalar(1);
        auto W = weight(l);
        for (Eigen::Index j = 0; j < W.cols(); ++j) {
            for (Eigen::Index i = 0; i < W.rows(); ++i) {
                W(i, j) = static_cast<Scalar>(dist(rng)) * scale;
            }
        }
        auto b = bias(l);
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            b[i] = static_cast<Scalar>(dist(rng)) * scale;
        }
    }
    ++generation_;
}

template <typename Scalar>
Activation DenseNet<Scalar>::activation_of(int layer) const {
    return layer + 1 == layer_count() ? output_act_ : hidden_;
}

template <typename Scalar>
Eigen::Map<const typename DenseNet<Scalar>::Matrix> DenseNet<Scalar>::weight(int l) const {
    return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}

template <typename Scalar>
Eigen::Map<const typename DenseNet<Scalar>::Vector> DenseNet<Scalar>::bias(int l) const {
    return {params_.data() + offsets_[l] + Eigen::Index(sizes_[l]) * sizes_[l + 1], sizes_[l + 1]};
}

template <typename Scalar>
Eigen::Map<typename DenseNet<Scalar>::Matrix> DenseNet<Scalar>::weight(int l) {
    ++generation_;
    return {params_.data() + offsets_[l], sizes_[l + 1], sizes_[l]};
}

template <typename Scalar>
Eigen::Map<typename DenseNet<Scalar>::Vector> DenseNet<Scalar>::bias(int l) {
    ++generation_;
    return {params_.data() + offsets_[l] + Eigen::Index(sizes_[l]) * sizes_[l + 1], sizes_[l + 1]};
}

template <typename Scalar>
typename DenseNet<Scalar>::Vector &DenseNet<Scalar>::mutable_parameters() {
    ++generation_;
    return params_;
}

template <typename Scalar>
typename DenseNet<Scalar>::Matrix DenseNet<Scalar>::forward(const Matrix &x) const {
    if (x.rows() != input_size()) {
        throw std::invalid_argument("DenseNet::forward: expected input size " +
                                    std::to_string(input_size()) + ", got " +
                                    std::to_string(x.rows()));
    }
    Matrix a = x;
    for (int l = 0; l < layer_count(); ++l) {
        Matrix z = weight(l) * a;
        z.colwise() += bias(l);
        activate_inplace(z, activation_of(l));
        a = std::move(z);
    }
    return a;
}

template <typename Scalar>
typename DenseNet<Scalar>::Matrix DenseNet<Scalar>::forward(const Matrix &x, Cache &cache) const {
    if (x.rows() != input_size()) {
        throw std::invalid_argument("DenseNet::forward: expected input size " +
                                    std::to_string(input_size()) + ", got " +
                                    std::to_string(x.rows()));
    }
    const int L = layer_count();
    cache.inputs.resize(L);
    cache.pre.resize(L);
    cache.owner = this;
    cache.generation = generation_;
    cache.inputs[0] = x;
    for (int l = 0; l < L; ++l) {
        Matrix &z = cache.pre[l];
        z.noalias() = weight(l) * cache.inputs[l];
        z.colwise() += bias(l);
        Matrix a = z;
        activate_inplace(a, activation_of(l));
        if (l + 1 < L) {
            cache.inputs[l + 1] = std::move(a);
        } else {
            cache.output = std::move(a);
        }
    }
    return cache.output;
}

template <typename Scalar>
typename DenseNet<Scalar>::Vector DenseNet<Scalar>::forward_one(const Vector &x) const {
    return forward(Matrix(x));
}

template <typename Scalar>
void DenseNet<Scalar>::check_cache(const Cache &cache) const {
    if (cache.owner != this || cache.generation != generation_ ||
        static_cast<int>(cache.pre.size()) != layer_count()) {
        throw std::logic_error("DenseNet::backward: stale or foreign forward cache");
    }
}

template <typename Scalar>
typename DenseNet<Scalar>::Gradients DenseNet<Scalar>::backward(const Cache &cache,
                                                                const Matrix &output_grad) const {
    check_cache(cache);
    if (output_grad.rows() != output_size() || output_grad.cols() != cache.output.cols()) {
        throw std::invalid_argument("DenseNet::backward: output gradient shape mismatch");
    }
    Gradients g;
    g.params = Vector::Zero(params_.size());
    const int L = layer_count();
    Matrix delta = output_grad;
    for (int l = L - 1; l >= 0; --l) {
        const Matrix &post = l + 1 < L ? cache.inputs[l + 1] : cache.output;
        scale_by_derivative(delta, cache.pre[l], post, activation_of(l));
        Eigen::Map<Matrix> dW(g.params.data() + offsets_[l], sizes_[l + 1], sizes_[l]);
        Eigen::Map<Vector> db(g.params.data() + offsets_[l] + Eigen::Index(sizes_[l]) * sizes_[l + 1],
                              sizes_[l + 1]);
        dW.noalias() = delta * cache.inputs[l].transpose();
        db = delta.rowwise().sum();
        Matrix next = weight(l).transpose() * delta;
        delta = std::move(next);
    }
    g.input = std::move(delta);
    return g;
}

template <typename Scalar>
typename DenseNet<Scalar>::Matrix DenseNet<Scalar>::input_gradient(
    const Cache &cache, const Matrix &output_grad) const {
    check_cache(cache);
    if (output_grad.rows() != output_size() || output_grad.cols() != cache.output.cols()) {
        throw std::invalid_argument("DenseNet::input_gradient: output gradient shape mismatch");
    }
    const int L = layer_count();
    Matrix delta = output_grad;
    for (int l = L - 1; l >= 0; --l) {
        const Matrix &post = l + 1 < L ? cache.inputs[l + 1] : cache.output;
        scale_by_derivative(delta, cache.pre[l], post, activation_of(l));
        Matrix next = weight(l).transpose() * delta;
        delta = std::move(next);
    }
    return delta;
}

template <typename Scalar>
void DenseNet<Scalar>::polyak_into(DenseNet &target, Scalar tau) const {
    if (!same_shape(target)) {
        throw std::invalid_argument("polyak_into: network shapes differ");
    }
    auto &tp = target.mutable_parameters();
    tp = (Scalar(1) - tau) * tp + tau * params_;
}

template <typename Scalar>
bool DenseNet<Scalar>::same_shape(const DenseNet &other) const {
    return sizes_ == other.sizes_ && hidden_ == other.hidden_ && output_act_ == other.output_act_;
}

template <typename Scalar>
void adam_step(AdamState<Scalar> &opt, Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> params,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &grads) {
    if (grads.size() != params.size() || opt.m.size() != params.size() ||
        opt.v.size() != params.size()) {
        throw std::invalid_argument("adam_step: shape mismatch");
    }
    if (!grads.allFinite()) {
        throw TrainingDiverged("adam_step: non-finite gradient");
    }
    ++opt.step;
    const Scalar b1 = static_cast<Scalar>(opt.beta1);
    const Scalar b2 = static_cast<Scalar>(opt.beta2);
    opt.m = b1 * opt.m + (Scalar(1) - b1) * grads;
    opt.v = b2 * opt.v + (Scalar(1) - b2) * grads.cwiseProduct(grads);
    const double t = static_cast<double>(opt.step);
    const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(opt.beta1, t));
    const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(opt.beta2, t));
    const Scalar lr = static_cast<Scalar>(opt.learning_rate);
    const Scalar eps = static_cast<Scalar>(opt.epsilon);
    params.array() -=
        lr * (opt.m.array() / c1) / ((opt.v.array() / c2).sqrt() + eps);
}

template <typename Scalar>
void adam_step(AdamState<Scalar> &opt, DenseNet<Scalar> &net,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> &grads) {
    adam_step<Scalar>(opt, net.mutable_parameters(), grads);
}

template class DenseNet<float>;
template class DenseNet<double>;

template void adam_step<float>(AdamState<float> &, Eigen::Ref<Eigen::VectorXf>,
                               const Eigen::VectorXf &);
template void adam_step<double>(AdamState<double> &, Eigen::Ref<Eigen::VectorXd>,
                                const Eigen::VectorXd &);
template void adam_step<float>(AdamState<float> &, DenseNet<float> &, const Eigen::VectorXf &);
template void adam_step<double>(AdamState<double> &, DenseNet<double> &,
                                const Eigen::VectorXd &);

}  // namespace rwctl
