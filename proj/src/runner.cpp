#include "rwctl/runner.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "rwctl/checkpoint.hpp"
#include "rwctl/error.hpp"

namespace rwctl {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const std::string &text, const fs::path &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

json vec_json(const Vec3 &v) { return json::array({v[0], v[1], v[2]}); }

std::string hex(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex << v;
    return ss.str();
}

json metrics_json(const std::optional<RunMetrics> &m) {
    if (!m) return nullptr;
    return {{"mean_err_pre_deg", m->mean_err_pre},
            {"mean_err_post_deg", m->mean_err_post},
            {"settle_time_s", m->settle_time_s},
            {"rms_omega_post", m->rms_omega_post},
            {"torque_smoothness", m->torque_smoothness}};
}

json report_json(const TrainingReport &r, const DwcLog &dwc) {
    json evals = json::array();
    for (const EvalStats &e : r.evaluations) {
        evals.push_back({{"step", e.step},
                         {"mean_return", e.mean_return},
                         {"mean_error_deg", e.mean_error_deg},
                         {"mean_error_post_deg", e.mean_error_post_deg},
                         {"mean_final_error_deg", e.mean_final_error_deg}});
    }
    return {{"variant", r.variant},
            {"seed", r.seed},
            {"env_steps", r.env_steps},
            {"episodes", r.episodes},
            {"critic_updates", r.critic_updates},
            {"actor_updates", r.actor_updates},
            {"transitions_stored", r.transitions_stored},
            {"aborted_episodes", r.aborted_episodes},
            {"diverged", r.diverged},
            {"diagnostic", r.diagnostic},
            {"dwc",
             {{"actor_updates", dwc.updates},
              {"components", dwc.components},
              {"clipped_components", dwc.clipped_components},
              {"unsaturated_changed", dwc.unsaturated_changed},
              {"out_of_bounds", dwc.out_of_bounds},
              {"max_abs_pre", dwc.max_abs_pre},
              {"max_abs_post", dwc.max_abs_post}}},
            {"evaluations", evals}};
}

json run_metadata(const RunConfig &cfg, const RunSummary &s) {
    json j = {{"agent", s.agent},
              {"variant", s.variant},
              {"seed", s.seed},
              {"scenario_seed", s.start.seed},
              {"initial_sigma", vec_json(s.start.state.attitude.sigma)},
              {"initial_omega", vec_json(s.start.state.omega)},
              {"goal", vec_json(s.start.goal.sigma_target.sigma)},
              {"duration_s", cfg.scenario.duration},
              {"control_dt", cfg.environment.control_dt},
              {"rows", s.rollout.records.size()},
              {"diverged", s.rollout.diverged},
              {"diagnostic", s.rollout.diagnostic},
              {"metrics", metrics_json(s.metrics)}};
    const auto ft = cfg.scenario.first_fault();
    j["fault_time_s"] = ft ? json(*ft) : json(nullptr);
    if (s.agent != "pd") j["agent_config_hash"] = hex(agent_config_hash(cfg.agent.td3));
    j["config"] = to_yaml(cfg);
    return j;
}

void finish_run(const RunConfig &cfg, RunSummary &s, const fs::path &dir) {
    if (!s.rollout.diverged) {
        s.metrics = compute_metrics(s.rollout.records, cfg.scenario.first_fault());
    }
    write_telemetry(s.rollout.records, (dir / "telemetry.csv").string());
    write_text(run_metadata(cfg, s).dump(2) + "\n", dir / "metadata.json");
}

PolicyFn agent_policy(const Td3HdAgent &agent) {
    return [&agent](const Observation &o) { return agent.policy(o); };
}

}  // namespace

ScenarioStart scenario_start(const ScenarioConfig &sc, std::uint64_t seed) {
    ScenarioStart s;
    s.seed = seed;
    std::mt19937_64 rng(mix_seed(seed ^ 0x5343454e4152494fULL));
    const UnitQuaternion q = sample_attitude(rng, sc.initial_angle_max);
    s.state.attitude = mrp_canonical(mrp_from_quat(q));
    if (sc.initial_omega_max > 0.0) {
        std::uniform_real_distribution<double> u(-sc.initial_omega_max, sc.initial_omega_max);
        for (int i = 0; i < 3; ++i) s.state.omega[i] = u(rng);
    }
    s.state.wheel_speeds = VecX::Zero(sc.model.wheels.count());
    s.state.t = 0.0;
    s.goal.sigma_target = AttitudeMRP{sc.goal};
    return s;
}

Environment make_scenario_env(const RunConfig &cfg, AgentKind kind) {
    EpisodeConfig ec = cfg.environment;
    ec.n_steps = cfg.scenario.steps(ec.control_dt);
    ec.fault_schedule = cfg.scenario.faults;
    ec.initial_angle_max = cfg.scenario.initial_angle_max;
    ec.initial_omega_max = cfg.scenario.initial_omega_max;
    ec.random_goal = false;
    std::unique_ptr<ControlAllocator> alloc;
    if (kind == AgentKind::Pd) {
        alloc = std::make_unique<IdentityAllocator>();
    } else {
        alloc = std::make_unique<RedistributionAllocator>(cfg.scenario.backup,
                                                          cfg.scenario.backup_saturation_steps);
    }
    return Environment(cfg.scenario.model, ec, std::move(alloc));
}

Environment make_training_env(const RunConfig &cfg) {
    return Environment(cfg.scenario.model, cfg.environment,
                       std::make_unique<RedistributionAllocator>(
                           cfg.scenario.backup, cfg.scenario.backup_saturation_steps));
}

Rollout rollout(Environment env, const ScenarioStart &start, const PolicyFn &policy) {
    Rollout r;
    Observation obs = env.reset_to(start.state, start.goal);
    r.records.reserve(static_cast<std::size_t>(env.config().n_steps));
    bool done = false;
    while (!done) {
        // Step count times the period, free of the clock's summation residue.
        const double t = env.steps_taken() * env.config().control_dt;
        const SpacecraftState before = env.state();
        StepOutcome out;
        try {
            out = env.step(policy(obs));
        } catch (const SimulationDiverged &e) {
            r.diverged = true;
            r.diagnostic = "simulation diverged at t = " + std::to_string(t) + " s: " + e.what();
            break;
        }
        r.records.push_back(make_record(t, obs, before, out));
        obs = out.next;
        done = out.done;
    }
    return r;
}

Td3HdAgent make_agent(const RunConfig &cfg, std::uint64_t seed) {
    Td3HdAgent agent(cfg.agent.td3, seed);
    if (cfg.agent.td3.project_actions) {
        agent.set_action_projection(action_projection(pyramid_geometry(cfg.scenario.model.wheels.beta)));
    }
    return agent;
}

RunSummary train_run(const RunConfig &cfg, std::uint64_t seed, const std::string &dir,
                     const ProgressFn &progress) {
    if (cfg.agent.kind == AgentKind::Pd) {
        throw ConfigError("train needs a learned agent (td3 or td3-hd), not pd");
    }
    const fs::path out(dir);
    fs::create_directories(out);
    Trainer trainer(cfg.agent.td3, cfg.training, make_training_env(cfg), seed);
    const std::string variant = cfg.agent.variant();
    TrainingReport report = trainer.run([&](const EvalStats &e) {
        if (!progress) return;
        std::ostringstream ss;
        ss.precision(4);
        ss << variant << " seed " << seed << " step " << e.step << ": return " << e.mean_return
           << ", error " << e.mean_error_deg << " deg (post-fault " << e.mean_error_post_deg << ")";
        progress(ss.str());
    });
    save_checkpoint(trainer.agent(), (out / "checkpoint.rwctl").string());
    write_text(report_json(report, trainer.agent().dwc_log()).dump(2) + "\n", out / "report.json");

    RunSummary s;
    s.agent = to_string(cfg.agent.kind);
    s.variant = variant;
    s.seed = seed;
    s.start = scenario_start(cfg.scenario, seed);
    s.rollout = rollout(make_scenario_env(cfg, cfg.agent.kind), s.start, agent_policy(trainer.agent()));
    s.training = std::move(report);
    s.directory = out.string();
    finish_run(cfg, s, out);
    return s;
}

RunSummary eval_run(const RunConfig &cfg, std::uint64_t seed, const std::string &dir,
                    const std::optional<std::string> &checkpoint) {
    const fs::path out(dir);
    RunSummary s;
    s.agent = to_string(cfg.agent.kind);
    s.variant = cfg.agent.variant();
    s.seed = seed;
    s.start = scenario_start(cfg.scenario, seed);
    s.directory = out.string();
    const Environment env = make_scenario_env(cfg, cfg.agent.kind);
    if (cfg.agent.kind == AgentKind::Pd) {
        const PdController pd(cfg.agent.pd, cfg.scenario.model.wheels);
        fs::create_directories(out);
        s.rollout = rollout(env, s.start, [&pd](const Observation &o) { return pd.act(o); });
    } else {
        if (!checkpoint) throw ConfigError("eval of a learned agent needs --checkpoint");
        Td3HdAgent agent = make_agent(cfg, seed);
        load_checkpoint(*checkpoint, agent);
        fs::create_directories(out);
        s.rollout = rollout(env, s.start, agent_policy(agent));
    }
    finish_run(cfg, s, out);
    return s;
}

std::vector<RunSummary> compare_runs(const RunConfig &cfg, int jobs, const ProgressFn &progress) {
    struct Task {
        AgentKind kind;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (AgentKind k : {AgentKind::Pd, AgentKind::Td3, AgentKind::Td3Hd}) {
        for (std::uint64_t seed : cfg.seeds) tasks.push_back({k, seed});
    }
    const fs::path root(cfg.output_dir);
    fs::create_directories(root);

    std::vector<RunSummary> results(tasks.size());
    std::mutex log_mutex;
    const ProgressFn log = [&](const std::string &msg) {
        if (!progress) return;
        const std::lock_guard<std::mutex> lock(log_mutex);
        progress(msg);
    };
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                RunConfig run = cfg;
                run.agent.set_kind(tasks[i].kind);
                const std::string name = to_string(tasks[i].kind);
                const fs::path dir = root / name / ("seed_" + std::to_string(tasks[i].seed));
                results[i] = tasks[i].kind == AgentKind::Pd
                                 ? eval_run(run, tasks[i].seed, dir.string(), std::nullopt)
                                 : train_run(run, tasks[i].seed, dir.string(), log);
                log(name + " seed " + std::to_string(tasks[i].seed) + " done");
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int n_threads = std::max(1, std::min(jobs, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread &t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    write_text(metrics_csv(results), root / "metrics.csv");
    json meta = json::array();
    for (const RunSummary &s : results) meta.push_back(run_metadata(cfg, s));
    for (std::size_t i = 0; i < results.size(); ++i) {
        meta[i]["config"] = nullptr;
        meta[i]["directory"] = fs::relative(results[i].directory, root).generic_string();
    }
    json top = {{"runs", meta}, {"config", to_yaml(cfg)}};
    write_text(top.dump(2) + "\n", root / "metadata.json");
    return results;
}

std::string metrics_csv(const std::vector<RunSummary> &runs) {
    std::ostringstream ss;
    ss.precision(17);
    ss << "agent,variant,seed,mean_err_pre_deg,mean_err_post_deg,settle_time_s,rms_omega_post,"
          "torque_smoothness,diverged\n";
    for (const RunSummary &s : runs) {
        ss << s.agent << ',' << s.variant << ',' << s.seed;
        if (s.metrics) {
            ss << ',' << s.metrics->mean_err_pre << ',' << s.metrics->mean_err_post << ','
               << s.metrics->settle_time_s << ',' << s.metrics->rms_omega_post << ','
               << s.metrics->torque_smoothness;
        } else {
            ss << ",nan,nan,nan,nan,nan";
        }
        ss << ',' << (s.rollout.diverged ? 1 : 0) << '\n';
    }
    return ss.str();
}

}  // namespace rwctl
