#include <doctest.h>

#include "rwctl/config.hpp"
#include "rwctl/error.hpp"

using namespace rwctl;

namespace {

int error_line(const std::string &yaml) {
    try {
        parse_config(yaml);
    } catch (const ConfigError &e) {
        return e.line();
    }
    return -1;
}

}  // namespace

TEST_CASE("defaults") {
    const RunConfig c = parse_config("");
    CHECK(c.scenario.duration == 8000.0);
    CHECK(c.scenario.first_fault() == 3000.0);
    CHECK(c.scenario.steps(1.0) == 8000);
    CHECK(c.environment.n_steps == 100);
    CHECK(c.environment.control_dt == 1.0);
    CHECK(c.environment.substeps == 10);
    CHECK(c.agent.kind == AgentKind::Td3Hd);
    CHECK(c.agent.td3.batch_size == 128);
    CHECK(c.agent.td3.policy_delay == 2);
    CHECK(c.agent.td3.dwc_threshold == 0.2);
    CHECK(c.agent.td3.alpha_is == 1.0);
    CHECK(c.agent.td3.buffer_capacity == 1'000'000);
    CHECK(c.agent.td3.learning_rate == 3e-4);
    CHECK(c.agent.td3.hidden == std::vector<int>{256, 256});
    CHECK(c.training.total_steps == 100'000);
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(c.scenario.model.wheels.speed_max == doctest::Approx(157.0796).epsilon(1e-6));
    CHECK(c.scenario.model.wheels.inertia == 4.67e-4);
}

TEST_CASE("values and units") {
    const RunConfig c = parse_config(R"(
scenario:
  inertia: [1, 2, 3]
  wheels:
    speed_max_rpm: 3000
    beta_deg: 30
  faults:
    - {wheel: 2, time: 100}
  initial_angle_max_deg: 90
environment:
  n_steps: 50
agent:
  kind: td3
  hidden: [64, 32]
seeds: [7]
output_dir: out
)");
    CHECK(c.scenario.model.inertia.matrix() == Eigen::Vector3d(1, 2, 3).asDiagonal().toDenseMatrix());
    CHECK(c.scenario.model.wheels.speed_max == doctest::Approx(3000 * kRpmToRadS).epsilon(1e-15));
    CHECK(c.scenario.model.wheels.beta == doctest::Approx(kPi / 6).epsilon(1e-15));
    CHECK(c.scenario.faults.events().size() == 1);
    CHECK(c.scenario.faults.events()[0].wheel == 2);
    CHECK(c.scenario.initial_angle_max == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(c.environment.n_steps == 50);
    CHECK(c.agent.kind == AgentKind::Td3);
    CHECK_FALSE(c.agent.td3.her_enabled);
    CHECK_FALSE(c.agent.td3.dwc_enabled);
    CHECK(c.agent.variant() == "td3");
    CHECK(c.agent.td3.hidden == std::vector<int>{64, 32});
    CHECK(c.seeds == std::vector<std::uint64_t>{7});
    CHECK(c.output_dir == "out");
}

TEST_CASE("errors carry their source line") {
    CHECK(error_line("agent:\n  gamma: 0.9\n  bogus: 1\n") == 3);
    CHECK(error_line("seeds: [1]\nextra: 2\n") == 2);
    CHECK(error_line("agent:\n  batch_size: abc\n") == 2);
    CHECK(error_line("agent:\n  kind: sac\n") == 2);
    CHECK(error_line("scenario:\n  duration: -5\n") == 2);
    CHECK(error_line("scenario:\n  faults:\n    - {wheel: 0, time: 1}\n    - {wheel: 0, time: 2}\n") > 0);
    CHECK(error_line("environment:\n  n_steps: 0\n") == 2);
    CHECK(error_line("agent: [1, 2]\n") == 1);
    CHECK(error_line("seeds: [1]\n") == -1);
    CHECK_THROWS_AS(parse_config("agent: {gamma: [1}\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/run.yaml"), ConfigError);
}

TEST_CASE("yaml round trip") {
    RunConfig c;
    c.scenario.duration = 1234.5;
    c.scenario.faults = FaultSchedule({{1, 10.25}, {3, 99.0}});
    c.scenario.goal = Vec3(0.1, -0.2, 0.05);
    c.scenario.backup = BackupPolicy::OnSaturation;
    c.scenario.model.wheels.has_backup = true;
    c.environment.reward.sparse = true;
    c.agent.td3.dwc_adaptive = true;
    c.agent.td3.hidden = {8, 16, 4};
    c.agent.pd.kp = 0.05;
    c.seeds = {11, 12};
    c.output_dir = "some dir";
    const std::string y = to_yaml(c);
    const RunConfig back = parse_config(y);
    CHECK(to_yaml(back) == y);
    CHECK(back.scenario.duration == 1234.5);
    CHECK(back.scenario.goal == c.scenario.goal);
    CHECK(back.scenario.model.wheels.speed_max ==
          doctest::Approx(c.scenario.model.wheels.speed_max).epsilon(1e-14));
    CHECK(agent_config_hash(back.agent.td3) == agent_config_hash(c.agent.td3));
    CHECK(back.output_dir == "some dir");
    CHECK(to_yaml(parse_config(to_yaml(RunConfig{}))) == to_yaml(RunConfig{}));
}

TEST_CASE("overrides") {
    RunConfig c;
    Overrides o;
    o.agent = "td3-hd";
    o.no_her = true;
    apply_overrides(c, o);
    CHECK(c.agent.variant() == "td3-dwc");

    Overrides both;
    both.no_her = true;
    both.no_dwc = true;
    both.fault_time = 1500.0;
    both.duration = 4000.0;
    both.seed = 9;
    both.out = "elsewhere";
    apply_overrides(c, both);
    CHECK(c.agent.variant() == "td3");
    CHECK(c.scenario.first_fault() == 1500.0);
    CHECK(c.scenario.duration == 4000.0);
    CHECK(c.seeds == std::vector<std::uint64_t>{9});
    CHECK(c.output_dir == "elsewhere");

    RunConfig none;
    none.scenario.faults = FaultSchedule{};
    Overrides ft;
    ft.fault_time = 10.0;
    apply_overrides(none, ft);
    CHECK(none.scenario.faults.events().size() == 1);
    CHECK(none.scenario.faults.events()[0].wheel == 0);

    Overrides pd;
    pd.agent = "pd";
    apply_overrides(none, pd);
    CHECK(none.agent.variant() == "pd");

    Overrides bad;
    bad.duration = -1.0;
    CHECK_THROWS_AS(apply_overrides(none, bad), ConfigError);
}

TEST_CASE("agent hash tracks every agent setting") {
    AgentConfig a;
    const std::uint64_t h = agent_config_hash(a);
    CHECK(h == agent_config_hash(AgentConfig{}));
    a.her_k = 3;
    CHECK(agent_config_hash(a) != h);
    AgentConfig b;
    b.hidden = {256, 128};
    CHECK(agent_config_hash(b) != h);
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}
