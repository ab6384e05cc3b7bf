#include <doctest.h>

#include <random>
#include <utility>

#include "rwctl/dense_net.hpp"
#include "rwctl/error.hpp"

using namespace rwctl;

using NetD = DenseNet<double>;
using MatD = NetD::Matrix;
using VecD = NetD::Vector;

namespace {

// Scalar whose gradient backward() computes: sum(out .* g).
double objective(const NetD &net, const MatD &x, const MatD &g) {
    return (net.forward(x).array() * g.array()).sum();
}

bool close(double analytic, double numeric) {
    const double diff = std::abs(analytic - numeric);
    return diff <= 1e-8 || diff / std::max(std::abs(analytic), std::abs(numeric)) < 1e-4;
}

}  // namespace

TEST_CASE("forward examples") {
    NetD zero({3, 4, 2}, Activation::Relu, Activation::Tanh);
    CHECK(zero.forward_one(VecD::Constant(3, 0.7)).isZero(0.0));

    NetD lin({3, 3}, Activation::Relu, Activation::Identity);
    lin.weight(0) = MatD::Identity(3, 3);
    const VecD x = (VecD(3) << 0.3, -1.5, 2.0).finished();
    CHECK(lin.forward_one(x) == x);

    // 1-2-1: h = relu(W1 x + b1), y = W2 h + b2
    NetD tiny({1, 2, 1}, Activation::Relu, Activation::Identity);
    tiny.weight(0) << 2.0, -1.0;
    tiny.bias(0) << 0.5, 0.25;
    tiny.weight(1) << 3.0, -4.0;
    tiny.bias(1) << 0.1;
    VecD in(1);
    in << 0.75;
    // h = (relu(2), relu(-0.5)) = (2, 0); y = 6 + 0.1
    CHECK(std::abs(tiny.forward_one(in)[0] - 6.1) < 1e-12);
    in << -1.0;
    // h = (relu(-1.5), relu(1.25)) = (0, 1.25); y = -5 + 0.1
    CHECK(std::abs(tiny.forward_one(in)[0] - (-4.9)) < 1e-12);

    NetD t({1, 1}, Activation::Relu, Activation::Tanh);
    t.weight(0) << 1.0;
    in << 0.5;
    CHECK(std::abs(t.forward_one(in)[0] - std::tanh(0.5)) < 1e-15);

    CHECK_THROWS_AS(tiny.forward_one(VecD::Zero(2)), std::invalid_argument);
}

TEST_CASE("backward base cases") {
    std::mt19937_64 rng(2);
    NetD net({5, 6, 3}, Activation::Relu, Activation::Tanh);
    net.init_uniform(rng);
    NetD::Cache cache;
    const MatD x = MatD::Random(5, 4);
    net.forward(x, cache);
    const auto g = net.backward(cache, MatD::Zero(3, 4));
    CHECK(g.params.isZero(0.0));
    CHECK(g.input.isZero(0.0));

    NetD lin({4, 3}, Activation::Relu, Activation::Identity);
    lin.init_uniform(rng);
    NetD::Cache lc;
    lin.forward(MatD::Random(4, 1), lc);
    const MatD og = MatD::Random(3, 1);
    const MatD expected = std::as_const(lin).weight(0).transpose() * og;
    CHECK((lin.backward(lc, og).input - expected).norm() < 1e-15);
    CHECK((lin.input_gradient(lc, og) - expected).norm() < 1e-15);
}

TEST_CASE("stale caches are rejected") {
    std::mt19937_64 rng(3);
    NetD a({2, 3, 1}, Activation::Relu, Activation::Identity);
    NetD b({2, 3, 1}, Activation::Relu, Activation::Identity);
    a.init_uniform(rng);
    b.init_uniform(rng);
    NetD::Cache cache;
    a.forward(MatD::Random(2, 1), cache);
    CHECK_THROWS_AS((void)b.backward(cache, MatD::Ones(1, 1)), std::logic_error);
    a.mutable_parameters()[0] += 1.0;
    CHECK_THROWS_AS((void)a.backward(cache, MatD::Ones(1, 1)), std::logic_error);
}

TEST_CASE("gradients match central differences over 50 random nets") {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<int> width(1, 8), depth(1, 3);
    const Activation outs[] = {Activation::Identity, Activation::Tanh};
    for (int n = 0; n < 50; ++n) {
        std::vector<int> sizes{width(rng)};
        const int hidden = depth(rng);
        for (int h = 0; h < hidden; ++h) sizes.push_back(width(rng));
        sizes.push_back(width(rng));
        NetD net(sizes, Activation::Relu, outs[n % 2]);
        net.init_uniform(rng);
        std::normal_distribution<double> nd;
        MatD x(sizes.front(), 3), g(sizes.back(), 3);
        for (auto &v : x.reshaped()) v = nd(rng);
        for (auto &v : g.reshaped()) v = nd(rng);

        NetD::Cache cache;
        net.forward(x, cache);
        const auto grads = net.backward(cache, g);
        const double h = 1e-5;
        for (Eigen::Index p = 0; p < net.parameter_count(); ++p) {
            NetD plus = net, minus = net;
            plus.mutable_parameters()[p] += h;
            minus.mutable_parameters()[p] -= h;
            const double fd = (objective(plus, x, g) - objective(minus, x, g)) / (2 * h);
            CHECK(close(grads.params[p], fd));
        }
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            MatD xp = x, xm = x;
            xp.reshaped()[i] += h;
            xm.reshaped()[i] -= h;
            const double fd = (objective(net, xp, g) - objective(net, xm, g)) / (2 * h);
            CHECK(close(grads.input.reshaped()[i], fd));
        }
    }
}

TEST_CASE("initialization is seeded and bounded") {
    std::mt19937_64 r1(7), r2(7);
    NetD a({6, 16, 4}, Activation::Relu, Activation::Tanh);
    NetD b = a;
    a.init_uniform(r1, 1e-3);
    b.init_uniform(r2, 1e-3);
    CHECK(a.parameters() == b.parameters());
    CHECK(a.weight(0).cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(6.0));
    CHECK(a.weight(1).cwiseAbs().maxCoeff() <= 1e-3 / std::sqrt(16.0));
}

TEST_CASE("polyak tracking") {
    std::mt19937_64 rng(8);
    NetD online({2, 2}, Activation::Relu, Activation::Identity);
    online.init_uniform(rng);
    NetD target = online;
    target.mutable_parameters().setZero();
    online.polyak_into(target, 0.0);
    CHECK(target.parameters().isZero(0.0));
    online.polyak_into(target, 1.0);
    CHECK(target.parameters() == online.parameters());

    NetD one({1, 1}, Activation::Relu, Activation::Identity);
    NetD zero = one;
    one.mutable_parameters().setOnes();
    one.polyak_into(zero, 0.005);
    CHECK(zero.parameters()[0] == doctest::Approx(0.005).epsilon(1e-15));
}

TEST_CASE("adam examples") {
    AdamState<double> opt(1, 3e-4);
    VecD p = VecD::Constant(1, 2.0);
    adam_step<double>(opt, p, VecD::Zero(1));
    CHECK(p[0] == 2.0);

    AdamState<double> first(1, 3e-4);
    VecD q = VecD::Zero(1);
    adam_step<double>(first, q, VecD::Ones(1));
    // m_hat = 1, v_hat = 1, step = lr / (1 + eps)
    CHECK(q[0] == doctest::Approx(-3e-4 / (1.0 + 1e-8)).epsilon(1e-12));

    VecD bad = VecD::Zero(1);
    AdamState<double> o2(1, 3e-4);
    VecD nan_grad = VecD::Constant(1, std::nan(""));
    CHECK_THROWS_AS(adam_step<double>(o2, bad, nan_grad), TrainingDiverged);
    CHECK(bad[0] == 0.0);
    CHECK(o2.step == 0);
}

TEST_CASE("adam is deterministic and stays finite") {
    auto run = [](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        NetD net({6, 8, 8, 4}, Activation::Relu, Activation::Tanh);
        net.init_uniform(rng);
        AdamState<double> opt(net.parameter_count(), 3e-4);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int k = 0; k < 10000; ++k) {
            VecD g(net.parameter_count());
            for (auto &v : g) v = u(rng);
            adam_step(opt, net, g);
        }
        return net.parameters();
    };
    const VecD a = run(5), b = run(5);
    CHECK(a == b);
    CHECK(a.allFinite());
}
