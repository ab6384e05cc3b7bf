#include <doctest.h>

#include <algorithm>

#include "episode_util.hpp"
#include "rwctl/environment.hpp"
#include "rwctl/error.hpp"
#include "test_util.hpp"

using namespace rwctl;
using namespace testutil;

TEST_CASE("reward examples") {
    CHECK(std::abs(reward_fn(0.5, 0.3, 0.1) - 0.19) < 1e-12);
    CHECK(std::abs(reward_fn(0.2, 0.2, 0.0) - 0.01) < 1e-12);
    CHECK(std::abs(reward_fn(0.3, 0.4, 1.2) - (-10.11)) < 1e-12);
}

TEST_CASE("reward equals the sum of its terms") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> e(0.0, 1.0), w(0.0, 2.0);
    for (int k = 0; k < 10000; ++k) {
        const double ep = e(rng), ec = e(rng), om = w(rng);
        const double r1 = ep - ec;
        const double r2 = om > 1.0 ? -10.0 : 0.0;
        const double r3 = ec < 0.25 ? 0.01 : -0.01;
        CHECK(reward_fn(ep, ec, om) == r1 + r2 + r3);
        const RewardTerms t = reward_terms(ep, ec, om);
        CHECK(t.error_reduction == r1);
        CHECK(t.rate_penalty == r2);
        CHECK(t.accuracy == r3);
    }
    RewardConfig sparse;
    sparse.sparse = true;
    CHECK(reward_fn(0.9, 0.1, 0.0, sparse) == 0.01);
    CHECK(reward_fn(0.1, 0.9, 1.5, sparse) == -10.01);
}

TEST_CASE("reset is deterministic in the seed") {
    Environment env(SpacecraftModel{}, EpisodeConfig{});
    const Observation a = env.reset(42).first;
    const Observation b = env.reset(42).first;
    CHECK(a.to_vector() == b.to_vector());
    CHECK(env.reset(43).first.to_vector() != a.to_vector());
    for (int i = 0; i < 3; ++i) CHECK(std::abs(a.omega[i]) <= 0.05);
    CHECK(env.state().wheel_speeds.isZero(0.0));
}

TEST_CASE("zero initial angle gives zero error") {
    EpisodeConfig cfg;
    cfg.initial_angle_max = 0.0;
    Environment env(SpacecraftModel{}, cfg);
    CHECK(env.reset(7).first.mrp_error.norm() == 0.0);
}

TEST_CASE("reset angles follow the uniform-rotation measure") {
    // Restricted to angles <= A, uniform rotations have angle CDF
    // (t - sin t) / (A - sin A); compare deciles of 10000 resets.
    Environment env(SpacecraftModel{}, EpisodeConfig{});
    const double A = 120.0 * kPi / 180.0;
    std::vector<double> angles;
    for (std::uint64_t s = 0; s < 10000; ++s) {
        const Observation o = env.reset(s).first;
        angles.push_back(4.0 * std::atan(o.mrp_error.norm()));
    }
    CHECK(*std::max_element(angles.begin(), angles.end()) <= A + 1e-12);

    const auto cdf = [&](double t) { return (t - std::sin(t)) / (A - std::sin(A)); };
    std::sort(angles.begin(), angles.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double f = cdf(angles[i]);
        ks = std::max({ks, std::abs(f - double(i) / angles.size()),
                       std::abs(f - double(i + 1) / angles.size())});
    }
    // 99.9% critical value of the one-sample KS statistic is 1.95 / sqrt(n).
    CHECK(ks < 1.95 / 100.0);
    // Nonuniform in angle: the lower half of the range holds well under half.
    const auto below = std::lower_bound(angles.begin(), angles.end(), A / 2) - angles.begin();
    CHECK(double(below) / angles.size() < 0.25);
}

TEST_CASE("step contract") {
    EpisodeConfig cfg;
    cfg.n_steps = 5;
    Environment env(SpacecraftModel{}, cfg);
    SpacecraftState rest;
    env.reset_to(rest, Goal{});
    CHECK_THROWS_AS(Environment(SpacecraftModel{}, cfg).step(Action{}), std::logic_error);
    for (int k = 1; k <= 5; ++k) {
        const StepOutcome out = env.step(Action{});
        CHECK(out.info.e_prev == 0.0);
        CHECK(out.info.e_curr == 0.0);
        CHECK(out.reward == 0.01);
        CHECK(out.done == (k == 5));
    }
    CHECK_THROWS_AS(env.step(Action{}), std::logic_error);
}

TEST_CASE("actions are clamped to the unit box") {
    Action a;
    a.a = Vec4(2.0, -3.0, 0.5, -0.5);
    CHECK(a.clamped().a == Vec4(1.0, -1.0, 0.5, -0.5));
}

TEST_CASE("divergence aborts the episode") {
    SpacecraftModel m;
    m.omega_cap = 0.01;
    Environment env(m, EpisodeConfig{});
    SpacecraftState s;
    s.omega = Vec3(0.02, 0, 0);
    env.reset_to(s, Goal{});
    CHECK_THROWS_AS(env.step(Action{}), SimulationDiverged);
    CHECK_FALSE(env.active());
    CHECK_THROWS_AS(env.step(Action{}), std::logic_error);
}

TEST_CASE("achieved goal") {
    SpacecraftState s;
    CHECK(achieved_goal(s).sigma.isZero(0.0));
    s.attitude.sigma = Vec3(0.1, 0.2, -0.3);
    CHECK(achieved_goal(s).sigma == s.attitude.sigma);
    s.attitude = mrp_from_quat(UnitQuaternion::from_axis_angle(Vec3(0, 0, 1), kPi / 2));
    CHECK(achieved_goal(s).sigma[2] == doctest::Approx(std::tan(kPi / 8)).epsilon(1e-14));
    CHECK(achieved_goal(s).sigma[2] == doctest::Approx(0.414214).epsilon(1e-6));
}

TEST_CASE("trajectory invariants") {
    Environment env(SpacecraftModel{}, EpisodeConfig{});
    std::mt19937_64 rng(17);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto ep = random_episode(env, seed, rng);
        CHECK(ep.size() == 100);
        for (std::size_t t = 0; t < ep.size(); ++t) {
            const TransitionInfo &i = *ep[t].info;
            CHECK(ep[t].next_obs.mrp_error.norm() <= 1.0 + 1e-12);
            CHECK(ep[t].reward == reward_fn(i.e_prev, i.e_curr, i.omega_norm));
            if (t + 1 < ep.size()) {
                CHECK(std::abs(i.e_curr - ep[t + 1].info->e_prev) <= 1e-15);
                CHECK(i.sigma_abs_next.sigma == ep[t + 1].info->sigma_abs.sigma);
            }
        }
    }
}

TEST_CASE("identical seed and actions give identical trajectories") {
    Environment a(SpacecraftModel{}, EpisodeConfig{}), b(SpacecraftModel{}, EpisodeConfig{});
    std::mt19937_64 ra(5), rb(5);
    const auto ea = random_episode(a, 99, ra);
    const auto eb = random_episode(b, 99, rb);
    for (std::size_t t = 0; t < ea.size(); ++t) {
        CHECK(ea[t].next_obs.to_vector() == eb[t].next_obs.to_vector());
        CHECK(ea[t].reward == eb[t].reward);
    }
}

TEST_CASE("relabel reward") {
    Environment env(SpacecraftModel{}, EpisodeConfig{});
    std::mt19937_64 rng(8);
    const auto ep = random_episode(env, 3, rng);
    for (const Transition &tr : ep) {
        CHECK(relabel_reward(tr, tr.goal) == tr.reward);
        const TransitionInfo &i = *tr.info;
        const Goal reached{i.sigma_abs_next};
        const double e_prev = mrp_error(i.sigma_abs, reached.sigma_target).norm();
        const double r = relabel_reward(tr, reached);
        CHECK(mrp_error(i.sigma_abs_next, reached.sigma_target).sigma.isZero(0.0));
        CHECK(r == reward_fn(e_prev, 0.0, i.omega_norm));
        if (i.omega_norm <= 1.0) CHECK(r >= 0.01);
    }

    Transition fast = ep.front();
    fast.info->omega_norm = 1.2;
    const Goal reached{fast.info->sigma_abs_next};
    const double e_prev = mrp_error(fast.info->sigma_abs, reached.sigma_target).norm();
    CHECK(relabel_reward(fast, reached) == doctest::Approx(e_prev - 10.0 + 0.01).epsilon(1e-15));

    Transition bare = ep.front();
    bare.info.reset();
    CHECK_THROWS_AS(relabel_reward(bare, reached), std::invalid_argument);
}

TEST_CASE("relabeling never changes the rate penalty") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> w(0.0, 2.0);
    Environment env(SpacecraftModel{}, EpisodeConfig{});
    const auto ep = random_episode(env, 1, rng);
    for (int k = 0; k < 1000; ++k) {
        Transition tr = ep[k % ep.size()];
        tr.info->omega_norm = w(rng);
        const Goal g{mrp_from_quat(sample_attitude(rng, kPi))};
        const TransitionInfo &i = *tr.info;
        const double ep_ = mrp_error(i.sigma_abs, g.sigma_target).norm();
        const double ec = mrp_error(i.sigma_abs_next, g.sigma_target).norm();
        const RewardTerms t = reward_terms(ep_, ec, i.omega_norm);
        CHECK(t.rate_penalty == (i.omega_norm > 1.0 ? -10.0 : 0.0));
        CHECK(relabel_reward(tr, g) == reward_fn(ep_, ec, i.omega_norm));
    }
}

TEST_CASE("episode config validation") {
    EpisodeConfig cfg;
    cfg.n_steps = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
