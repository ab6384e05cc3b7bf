#include <doctest.h>

#include <random>

#include "rwctl/baselines.hpp"
#include "rwctl/error.hpp"

using namespace rwctl;

TEST_CASE("pd law") {
    const PDGains g;
    CHECK(pd_control(Vec3::Zero(), Vec3::Zero(), g).isZero(0.0));
    CHECK((pd_control(Vec3(0.1, 0, 0), Vec3::Zero(), g) - Vec3(-0.002, 0, 0)).norm() < 1e-15);
    CHECK((pd_control(Vec3::Zero(), Vec3(0.01, 0, 0), g) - Vec3(-0.002, 0, 0)).norm() < 1e-15);
    PDGains bad;
    bad.kd = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("pseudo-inverse allocation") {
    const Mat3X G = pyramid_geometry(kPi / 4);
    const PseudoInverseAllocation alloc(G);
    CHECK(alloc.allocate(Vec3::Zero()).isZero(0.0));
    const VecX tau = alloc.allocate(Vec3(0, 0, -0.1));
    for (int i = 0; i < 4; ++i) {
        CHECK(tau[i] == doctest::Approx(0.1 / (4 * std::sin(kPi / 4))).epsilon(1e-14));
        CHECK(tau[i] == doctest::Approx(0.0354).epsilon(1e-3));
    }

    std::mt19937_64 rng(10);
    std::normal_distribution<double> n(0.0, 0.05);
    for (int k = 0; k < 1000; ++k) {
        const Vec3 u(n(rng), n(rng), n(rng));
        const VecX t = alloc.allocate(u);
        CHECK((G * t + u).norm() < 1e-10);
        // Minimum norm: no component along the null space of G.
        CHECK(std::abs(t.dot(Eigen::Vector4d(1, -1, 1, -1))) < 1e-12);
    }

    Mat3X flat = Mat3X::Zero(3, 4);
    flat.row(2).setOnes();
    CHECK_THROWS_AS(PseudoInverseAllocation{flat}, std::invalid_argument);
}

TEST_CASE("pd controller emits a normalized action") {
    const WheelParams wheels;
    const PdController pd(PDGains{}, wheels);
    Observation obs;
    obs.mrp_error = Vec3(0.1, -0.05, 0.02);
    obs.omega = Vec3(0.001, 0.0, -0.002);
    const Action a = pd.act(obs);
    const PseudoInverseAllocation alloc(pyramid_geometry(wheels.beta));
    const VecX tau = alloc.allocate(pd_control(obs.mrp_error, obs.omega, PDGains{}));
    for (int i = 0; i < 4; ++i) {
        CHECK(a.a[i] == doctest::Approx(std::clamp(tau[i] / wheels.torque_max, -1.0, 1.0)).epsilon(1e-14));
    }
    obs.mrp_error = Vec3(1.0, 0, 0);
    CHECK(pd.act(obs).a.cwiseAbs().maxCoeff() <= 1.0);
}

TEST_CASE("pd settles the nominal plant from 60 degrees") {
    EpisodeConfig cfg;
    cfg.n_steps = 800;
    Environment env(SpacecraftModel{}, cfg);
    const PdController pd(PDGains{}, env.model().wheels);
    SpacecraftState s;
    s.attitude = mrp_from_quat(UnitQuaternion::from_axis_angle(Vec3(1, 2, -1), kPi / 3));
    Observation obs = env.reset_to(s, Goal{});
    double below_at = -1.0;
    for (int k = 0; k < 800; ++k) {
        const double angle = principal_angle(AttitudeMRP{obs.mrp_error}) * 180.0 / kPi;
        if (angle < 1.0 && below_at < 0) below_at = env.elapsed();
        obs = env.step(pd.act(obs)).next;
    }
    CHECK(below_at >= 0.0);
    CHECK(below_at < 500.0);
    CHECK(obs.omega.norm() < 1e-3);
}
