#include "rwctl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rwctl/error.hpp"

namespace rwctl {

namespace {

double error_deg(const Observation &obs) {
    return principal_angle(AttitudeMRP{obs.mrp_error}) * 180.0 / kPi;
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void TrainingConfig::validate() const {
    if (eval_interval == 0) throw ConfigError("training.eval_interval must be >= 1");
    if (eval_episodes < 1) throw ConfigError("training.eval_episodes must be >= 1");
}

std::vector<std::uint64_t> eval_seeds(const TrainingConfig &cfg) {
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < cfg.eval_episodes; ++i) {
        seeds.push_back(cfg.eval_seed_base + static_cast<std::uint64_t>(i));
    }
    return seeds;
}

EvalStats evaluate_policy(const PolicyFn &policy, const Environment &prototype,
                          const std::vector<std::uint64_t> &seeds) {
    EvalStats st;
    if (seeds.empty()) return st;
    double fault_time = std::numeric_limits<double>::infinity();
    for (const FaultEvent &ev : prototype.config().fault_schedule.events()) {
        fault_time = std::min(fault_time, ev.time);
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(fault_time));
    double err_sum = 0.0, post_sum = 0.0;
    std::uint64_t err_count = 0, post_count = 0;
    for (std::uint64_t s : seeds) {
        Environment env = prototype;
        Observation obs = env.reset(s).first;
        double ret = 0.0;
        bool done = false;
        while (!done) {
            const double e = error_deg(obs);
            const bool post = env.elapsed() >= fault_time - tol;
            StepOutcome out;
            try {
                out = env.step(policy(obs));
            } catch (const SimulationDiverged &) {
                // Remaining steps count at the worst error so a blow-up never looks good.
                const auto left = static_cast<std::uint64_t>(env.config().n_steps - env.steps_taken());
                err_sum += 180.0 * static_cast<double>(left);
                err_count += left;
                post_sum += 180.0 * static_cast<double>(left);
                post_count += left;
                obs.mrp_error = Vec3(1.0, 0.0, 0.0);
                break;
            }
            err_sum += e;
            ++err_count;
            if (post) {
                post_sum += e;
                ++post_count;
            }
            ret += out.reward;
            obs = out.next;
            done = out.done;
        }
        st.mean_return += ret;
        st.mean_final_error_deg += error_deg(obs);
    }
    const auto n = static_cast<double>(seeds.size());
    st.mean_return /= n;
    st.mean_final_error_deg /= n;
    st.mean_error_deg = err_count > 0 ? err_sum / static_cast<double>(err_count) : 0.0;
    st.mean_error_post_deg =
        post_count > 0 ? post_sum / static_cast<double>(post_count) : st.mean_error_deg;
    return st;
}

Trainer::Trainer(AgentConfig agent_cfg, TrainingConfig train_cfg, Environment env,
                 std::uint64_t seed)
    : cfg_(train_cfg),
      env_(std::move(env)),
      seed_(seed),
      agent_(agent_cfg, mix_seed(seed)),
      buffer_(agent_cfg.buffer_capacity),
      her_rng_(mix_seed(seed ^ 0x4845525f52454c41ULL)) {
    cfg_.validate();
    if (agent_.config().project_actions) {
        agent_.set_action_projection(action_projection(pyramid_geometry(env_.model().wheels.beta)));
    }
}

EvalStats Trainer::evaluate(std::uint64_t step) const {
    const Td3HdAgent &agent = agent_;
    EvalStats st = evaluate_policy([&agent](const Observation &o) { return agent.policy(o); },
                                   env_, eval_seeds(cfg_));
    st.step = step;
    return st;
}

TrainingReport Trainer::run(const std::function<void(const EvalStats &)> &on_eval) {
    TrainingReport rep;
    rep.variant = agent_.config().variant();
    rep.seed = seed_;
    auto record_eval = [&](std::uint64_t step) {
        rep.evaluations.push_back(evaluate(step));
        if (on_eval) on_eval(rep.evaluations.back());
    };
    record_eval(0);

    std::uint64_t step = 0;
    std::vector<Transition> episode;
    episode.reserve(static_cast<std::size_t>(env_.config().n_steps));
    try {
        while (step < cfg_.total_steps) {
            Observation obs = env_.reset(mix_seed(seed_ + 0x1000 + rep.episodes)).first;
            episode.clear();
            bool done = false;
            while (!done && step < cfg_.total_steps) {
                const Action a = agent_.select_action(obs, true);
                StepOutcome out;
                try {
                    out = env_.step(a);
                } catch (const SimulationDiverged &) {
                    ++rep.aborted_episodes;
                    break;
                }
                Transition tr;
                tr.obs = obs;
                tr.action = a;
                tr.reward = out.reward;
                tr.next_obs = out.next;
                tr.done = out.done;
                tr.info = out.info;
                tr.goal = env_.goal();
                episode.push_back(std::move(tr));
                obs = out.next;
                done = out.done;
                ++step;

                if (step > cfg_.warmup_steps &&
                    buffer_.size() >= static_cast<std::size_t>(agent_.config().batch_size)) {
                    agent_.update(buffer_);
                }
                if (step % cfg_.eval_interval == 0) record_eval(step);
            }
            rep.transitions_stored +=
                her_store(episode, buffer_, agent_.config(), env_.config().reward, her_rng_);
            ++rep.episodes;
        }
        if (rep.evaluations.back().step != step) record_eval(step);
    } catch (const TrainingDiverged &e) {
        rep.diverged = true;
        rep.diagnostic = std::string("training diverged after ") + std::to_string(step) +
                         " environment steps: " + e.what();
    }
    rep.env_steps = step;
    rep.critic_updates = agent_.critic_updates();
    rep.actor_updates = agent_.actor_updates();
    return rep;
}

}  // namespace rwctl
