#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rwctl/checkpoint.hpp"
#include "rwctl/error.hpp"
#include "rwctl/metrics.hpp"
#include "rwctl/plot.hpp"
#include "rwctl/runner.hpp"

using namespace rwctl;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("rwctl_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TelemetryRecord record(double t, double err_deg, double tau = 0.0) {
    TelemetryRecord r;
    r.t = t;
    r.error_angle_deg = err_deg;
    r.tau_cmd = VecX::Constant(4, tau);
    r.tau_applied = VecX::Constant(4, tau);
    r.wheel_speed = VecX::Zero(4);
    r.fault_flags.assign(4, false);
    return r;
}

RunConfig tiny_config() {
    RunConfig c;
    c.agent.td3.hidden = {16, 16};
    c.agent.td3.batch_size = 16;
    c.agent.td3.buffer_capacity = 5000;
    c.training.total_steps = 300;
    c.training.warmup_steps = 100;
    c.training.eval_interval = 150;
    c.training.eval_episodes = 2;
    c.scenario.duration = 400.0;
    c.scenario.faults = FaultSchedule({{0, 150.0}});
    c.seeds = {1, 2};
    return c;
}

}  // namespace

TEST_CASE("telemetry csv") {
    CHECK(telemetry_csv({}) == [] {
        std::string h;
        for (const auto &c : telemetry_header(4)) h += (h.empty() ? "" : ",") + c;
        return h + "\n";
    }());
    CHECK(parse_telemetry(telemetry_csv({})).empty());
    CHECK(telemetry_header(5).size() == 9 + 4 * 5);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    std::vector<TelemetryRecord> recs;
    for (int k = 0; k < 50; ++k) {
        TelemetryRecord r = record(k * 1.0, std::abs(n(rng)) * 30);
        r.sigma_err = Vec3(n(rng), n(rng), n(rng)) * 0.1;
        r.omega = Vec3(n(rng), n(rng), n(rng)) * 1e-3;
        for (int i = 0; i < 4; ++i) {
            r.tau_cmd[i] = n(rng) * 0.01;
            r.tau_applied[i] = r.tau_cmd[i] / 3;
            r.wheel_speed[i] = n(rng) * 100;
        }
        r.reward = n(rng);
        r.fault_flags[0] = k > 20;
        recs.push_back(r);
    }
    recs[3].reward = std::numeric_limits<double>::quiet_NaN();
    const auto back = parse_telemetry(telemetry_csv(recs));
    REQUIRE(back.size() == recs.size());
    for (std::size_t k = 0; k < recs.size(); ++k) {
        CHECK(back[k].t == recs[k].t);
        CHECK(back[k].sigma_err == recs[k].sigma_err);
        CHECK(back[k].omega == recs[k].omega);
        CHECK(back[k].tau_cmd == recs[k].tau_cmd);
        CHECK(back[k].tau_applied == recs[k].tau_applied);
        CHECK(back[k].wheel_speed == recs[k].wheel_speed);
        CHECK(back[k].fault_flags == recs[k].fault_flags);
        if (k != 3) CHECK(back[k].reward == recs[k].reward);
    }
    CHECK(std::isnan(back[3].reward));
    CHECK_THROWS_AS(parse_telemetry("t,bogus\n1,2\n"), std::runtime_error);
}

TEST_CASE("metrics examples") {
    std::vector<TelemetryRecord> zero;
    for (int k = 0; k < 500; ++k) zero.push_back(record(k, 0.0, 0.01));
    const RunMetrics m = compute_metrics(zero, 200.0);
    CHECK(m.mean_err_pre == 0.0);
    CHECK(m.mean_err_post == 0.0);
    CHECK(m.settle_time_s == 0.0);
    CHECK(m.rms_omega_post == 0.0);
    CHECK(m.torque_smoothness == 0.0);

    std::vector<TelemetryRecord> step;
    for (int k = 0; k < 400; ++k) step.push_back(record(k, k < 100 ? 10.0 : 0.0));
    CHECK(settle_time(step) == 100.0);
    const RunMetrics s = compute_metrics(step, 200.0);
    CHECK(s.mean_err_pre == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(s.mean_err_post == 0.0);

    std::vector<TelemetryRecord> never;
    for (int k = 0; k < 300; ++k) never.push_back(record(k, (k % 50 == 0) ? 2.0 : 0.5));
    CHECK(std::isnan(settle_time(never)));

    // Alternating +-0.01 on every wheel: 999 moves of 0.02 in 1000 one-second records.
    std::vector<TelemetryRecord> wiggle;
    for (int k = 0; k < 1000; ++k) wiggle.push_back(record(k, 0.0, k % 2 ? 0.01 : -0.01));
    CHECK(torque_smoothness(wiggle) == doctest::Approx(19.98).epsilon(1e-12));

    std::vector<TelemetryRecord> spin;
    for (int k = 0; k < 10; ++k) {
        TelemetryRecord r = record(k, 1.0);
        r.omega = Vec3(0.0, k < 5 ? 0.0 : 0.3, k < 5 ? 0.0 : 0.4);
        spin.push_back(r);
    }
    CHECK(compute_metrics(spin, 5.0).rms_omega_post == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::isnan(compute_metrics(spin, std::nullopt).mean_err_post));

    CHECK_THROWS_AS(compute_metrics({}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(compute_metrics(zero, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(compute_metrics(zero, 1e6), std::invalid_argument);
}

TEST_CASE("svg charts") {
    std::vector<TelemetryRecord> recs;
    for (int k = 0; k < 100; ++k) recs.push_back(record(k, 50.0 * std::exp(-k / 20.0), 0.001 * k));
    const std::string svg = render_svg(telemetry_charts(recs, "pd/seed_1"));
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("pd/seed_1") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("scenario starts are shared and bounded") {
    const RunConfig c;
    for (std::uint64_t seed = 1; seed < 50; ++seed) {
        const ScenarioStart a = scenario_start(c.scenario, seed);
        const ScenarioStart b = scenario_start(c.scenario, seed);
        CHECK(a.state.attitude.sigma == b.state.attitude.sigma);
        CHECK(principal_angle(a.state.attitude) <= c.scenario.initial_angle_max + 1e-12);
        CHECK(a.state.omega.isZero(0.0));
    }
    CHECK(scenario_start(c.scenario, 1).state.attitude.sigma !=
          scenario_start(c.scenario, 2).state.attitude.sigma);
}

TEST_CASE("pd scenario rollout with a fault at 3000 s") {
    RunConfig c;
    const Environment env = make_scenario_env(c, AgentKind::Pd);
    const PdController pd(c.agent.pd, env.model().wheels);
    const Rollout r = rollout(env, scenario_start(c.scenario, 1),
                              [&](const Observation &o) { return pd.act(o); });
    CHECK_FALSE(r.diverged);
    REQUIRE(r.records.size() == 8000);
    CHECK(r.records.front().t == 0.0);
    CHECK(r.records.back().t == 7999.0);
    for (const TelemetryRecord &rec : r.records) {
        if (rec.t >= 3000.0) {
            CHECK(rec.tau_applied[0] == 0.0);
            CHECK(rec.fault_flags[0]);
        }
        CHECK(rec.error_angle_deg ==
              doctest::Approx(principal_angle(AttitudeMRP{rec.sigma_err}) * 180.0 / kPi).epsilon(1e-12));
    }
    const fs::path dir = scratch("telemetry");
    write_telemetry(r.records, (dir / "t.csv").string());
    const auto back = read_telemetry((dir / "t.csv").string());
    CHECK(back.size() == 8000);
    CHECK(back[4321].omega == r.records[4321].omega);
}

TEST_CASE("checkpoint round trip") {
    const RunConfig c = tiny_config();
    Td3HdAgent agent = make_agent(c, 4);
    ReplayBuffer buf(1000);
    Environment env = make_training_env(c);
    std::mt19937_64 rng(1);
    for (int e = 0; e < 2; ++e) {
        Observation obs = env.reset(e).first;
        std::vector<Transition> ep;
        for (int k = 0; k < 100; ++k) {
            const Action a = agent.select_action(obs, true);
            const StepOutcome out = env.step(a);
            Transition tr;
            tr.obs = obs;
            tr.action = a;
            tr.reward = out.reward;
            tr.next_obs = out.next;
            tr.done = out.done;
            tr.info = out.info;
            ep.push_back(tr);
            obs = out.next;
        }
        her_store(ep, buf, agent.config(), env.config().reward, rng);
    }
    for (int k = 0; k < 10; ++k) agent.update(buf);

    const fs::path dir = scratch("checkpoint");
    save_checkpoint(agent, (dir / "a.rwctl").string());
    Td3HdAgent restored = make_agent(c, 99);
    load_checkpoint((dir / "a.rwctl").string(), restored);
    save_checkpoint(restored, (dir / "b.rwctl").string());
    CHECK(slurp(dir / "a.rwctl") == slurp(dir / "b.rwctl"));
    CHECK(slurp(dir / "a.rwctl").rfind("RWCTL1", 0) == 0);
    CHECK(restored.critic_updates() == 10);
    CHECK(restored.actor_updates() == 5);

    const Environment proto = make_training_env(c);
    const auto seeds = eval_seeds(c.training);
    const EvalStats before = evaluate_policy([&](const Observation &o) { return agent.policy(o); }, proto, seeds);
    const EvalStats after = evaluate_policy([&](const Observation &o) { return restored.policy(o); }, proto, seeds);
    CHECK(std::abs(before.mean_return - after.mean_return) <= 1e-12);

    const std::string bytes = serialize_checkpoint(agent);
    RunConfig other = c;
    other.agent.td3.her_k = 2;
    Td3HdAgent mismatched = make_agent(other, 4);
    CHECK_THROWS_AS(deserialize_checkpoint(bytes, mismatched), CheckpointError);
    Td3HdAgent target = make_agent(c, 5);
    const auto untouched = target.networks().actor.parameters();
    CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 9), target), CheckpointError);
    CHECK_THROWS_AS(deserialize_checkpoint(bytes + "x", target), CheckpointError);
    CHECK_THROWS_AS(deserialize_checkpoint("RWCTL2" + bytes.substr(6), target), CheckpointError);
    CHECK(target.networks().actor.parameters() == untouched);
    CHECK_THROWS_AS(load_checkpoint((dir / "missing.rwctl").string(), target), CheckpointError);
}

TEST_CASE("training report and determinism at small scale") {
    const RunConfig c = tiny_config();
    const auto report = [&](std::uint64_t seed) {
        Trainer t(c.agent.td3, c.training, make_training_env(c), seed);
        Td3HdAgent agent = make_agent(c, seed);
        t.agent().set_action_projection(agent.action_projection());
        return std::make_pair(t.run(), serialize_checkpoint(t.agent()));
    };
    const auto [a, ca] = report(3);
    const auto [b, cb] = report(3);
    CHECK(ca == cb);
    REQUIRE(a.evaluations.size() == 3);
    CHECK(a.evaluations[0].step == 0);
    CHECK(a.evaluations[2].step == 300);
    CHECK(a.env_steps == 300);
    CHECK(a.critic_updates == 200);
    CHECK(a.actor_updates == 100);
    for (std::size_t k = 0; k < a.evaluations.size(); ++k) {
        CHECK(a.evaluations[k].mean_return == b.evaluations[k].mean_return);
    }

    TrainingConfig zero = c.training;
    zero.total_steps = 0;
    Trainer t(c.agent.td3, zero, make_training_env(c), 1);
    const TrainingReport r0 = t.run();
    CHECK(r0.evaluations.size() == 1);
    CHECK(r0.evaluations[0].step == 0);
}

TEST_CASE("compare writes one row per agent and seed on shared starts") {
    RunConfig c = tiny_config();
    c.output_dir = scratch("compare").string();
    const auto runs = compare_runs(c, 3);
    REQUIRE(runs.size() == 6);
    const std::string csv = slurp(fs::path(c.output_dir) / "metrics.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    const auto meta = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "metadata.json"));
    REQUIRE(meta["runs"].size() == 6);
    std::map<std::uint64_t, nlohmann::json> starts;
    std::set<std::string> agents;
    for (const auto &run : meta["runs"]) {
        agents.insert(run["agent"].get<std::string>());
        const auto seed = run["seed"].get<std::uint64_t>();
        if (starts.count(seed) == 0) starts[seed] = run["initial_sigma"];
        CHECK(run["initial_sigma"] == starts[seed]);
        CHECK(run["rows"] == 400);
    }
    CHECK(agents == std::set<std::string>{"pd", "td3", "td3-hd"});
    for (const char *d : {"pd/seed_1", "td3/seed_2", "td3-hd/seed_1"}) {
        CHECK(fs::exists(fs::path(c.output_dir) / d / "telemetry.csv"));
    }
    CHECK(fs::exists(fs::path(c.output_dir) / "td3-hd/seed_2/checkpoint.rwctl"));
}
