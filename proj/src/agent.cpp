#include "rwctl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rwctl/error.hpp"

namespace rwctl {

std::string AgentConfig::variant() const {
    if (her_enabled && dwc_enabled) return "td3-hd";
    if (her_enabled) return "td3-her";
    if (dwc_enabled) return "td3-dwc";
    return "td3";
}

void AgentConfig::validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("agent.gamma must lie in (0, 1]");
    if (batch_size < 1) throw ConfigError("agent.batch_size must be >= 1");
    if (policy_delay < 1) throw ConfigError("agent.policy_delay must be >= 1");
    if (!(polyak > 0.0 && polyak <= 1.0)) throw ConfigError("agent.polyak must lie in (0, 1]");
    if (!(exploration_noise_std >= 0.0)) throw ConfigError("agent.exploration_noise_std must be >= 0");
    if (!(target_noise_std >= 0.0)) throw ConfigError("agent.target_noise_std must be >= 0");
    if (!(target_noise_clip >= 0.0)) throw ConfigError("agent.target_noise_clip must be >= 0");
    if (!(dwc_threshold > 0.0)) throw ConfigError("agent.dwc_threshold must be > 0");
    if (dwc_window < 1) throw ConfigError("agent.dwc_window must be >= 1");
    if (her_k < 0) throw ConfigError("agent.her_k must be >= 0");
    if (!(alpha_is >= 0.0)) throw ConfigError("agent.alpha_is must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("agent.learning_rate must be > 0");
    if (hidden.empty()) throw ConfigError("agent.hidden needs at least one layer");
    for (int h : hidden) {
        if (h < 1) throw ConfigError("agent.hidden sizes must be >= 1");
    }
    if (buffer_capacity < static_cast<std::size_t>(batch_size)) {
        throw ConfigError("agent.buffer_capacity must be >= batch_size");
    }
    if (!(actor_last_layer_scale > 0.0)) throw ConfigError("agent.actor_last_layer_scale must be > 0");
}

ActorCritic ActorCritic::create(const AgentConfig &cfg, std::mt19937_64 &rng) {
    std::vector<int> actor_sizes{kObsDim};
    actor_sizes.insert(actor_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    actor_sizes.push_back(kActionDim);
    std::vector<int> critic_sizes{kObsDim + kActionDim};
    critic_sizes.insert(critic_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    critic_sizes.push_back(1);

    ActorCritic ac;
    ac.actor = Net(actor_sizes, Activation::Relu, Activation::Tanh);
    ac.critic1 = Net(critic_sizes, Activation::Relu, Activation::Identity);
    ac.critic2 = Net(critic_sizes, Activation::Relu, Activation::Identity);
    ac.actor.init_uniform(rng, static_cast<NetScalar>(cfg.actor_last_layer_scale));
    ac.critic1.init_uniform(rng);
    ac.critic2.init_uniform(rng);
    ac.actor_target = ac.actor;
    ac.critic1_target = ac.critic1;
    ac.critic2_target = ac.critic2;
    ac.actor_opt = AdamState<NetScalar>(ac.actor.parameter_count(), cfg.learning_rate);
    ac.critic1_opt = AdamState<NetScalar>(ac.critic1.parameter_count(), cfg.learning_rate);
    ac.critic2_opt = AdamState<NetScalar>(ac.critic2.parameter_count(), cfg.learning_rate);
    return ac;
}

namespace {

NetVector to_net(const Vec6 &v) { return v.cast<NetScalar>(); }

NetMatrix stack(const NetMatrix &top, const NetMatrix &bottom) {
    NetMatrix out(top.rows() + bottom.rows(), top.cols());
    out.topRows(top.rows()) = top;
    out.bottomRows(bottom.rows()) = bottom;
    return out;
}

NetMatrix gaussian(int rows, int cols, double std, double clip, std::mt19937_64 &rng) {
    NetMatrix m = NetMatrix::Zero(rows, cols);
    if (std <= 0.0) return m;
    std::normal_distribution<double> dist(0.0, std);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            m(i, j) = static_cast<NetScalar>(std::clamp(dist(rng), -clip, clip));
        }
    }
    return m;
}

}  // namespace

Td3HdAgent::Td3HdAgent(AgentConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), rng_(seed) {
    cfg_.validate();
    nets_ = ActorCritic::create(cfg_, rng_);
}

Action Td3HdAgent::policy(const Observation &obs) const {
    const NetVector out = nets_.actor.forward_one(to_net(obs.to_vector()));
    Action a;
    a.a = out.cast<double>();
    if (projected_) a.a = projection_ * a.a;
    return a.clamped();
}

Action Td3HdAgent::select_action(const Observation &obs, bool explore) {
    const NetVector out = nets_.actor.forward_one(to_net(obs.to_vector()));
    Action a;
    a.a = out.cast<double>();
    if (explore && cfg_.exploration_noise_std > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg_.exploration_noise_std);
        for (int i = 0; i < kActionDim; ++i) {
            a.a[i] += noise(rng_);
        }
    }
    if (projected_) a.a = projection_ * a.a;
    return a.clamped();
}

void Td3HdAgent::set_action_projection(const Eigen::Matrix4d &P) {
    if (!P.allFinite()) {
        throw std::invalid_argument("action projection must be finite");
    }
    projection_ = P;
    projection_net_ = P.cast<NetScalar>();
    projected_ = !P.isIdentity(0.0);
}

Eigen::Matrix4d action_projection(const Eigen::Matrix<double, 3, 4> &geometry) {
    const Eigen::Matrix3d GGt = geometry * geometry.transpose();
    if (std::abs(GGt.determinant()) < 1e-12) {
        throw std::invalid_argument("action_projection: geometry must have rank 3");
    }
    return geometry.transpose() * GGt.inverse() * geometry;
}

double Td3HdAgent::is_weight(const Transition &tr) const {
    const double ratio = importance_ratio_ ? importance_ratio_(tr) : 1.0;
    if (cfg_.alpha_is == 0.0) return 1.0;
    return std::pow(ratio, cfg_.alpha_is);
}

Batch Td3HdAgent::make_batch(const ReplayBuffer &buffer,
                             const std::vector<std::size_t> &indices) const {
    const int B = static_cast<int>(indices.size());
    Batch b;
    b.obs.resize(kObsDim, B);
    b.action.resize(kActionDim, B);
    b.reward.resize(B);
    b.next_obs.resize(kObsDim, B);
    b.done.resize(B);
    b.weight.resize(B);
    for (int j = 0; j < B; ++j) {
        const Transition &tr = buffer.at(indices[static_cast<size_t>(j)]);
        b.obs.col(j) = to_net(tr.obs.to_vector());
        b.action.col(j) = tr.action.a.cast<NetScalar>();
        b.reward[j] = static_cast<NetScalar>(tr.reward);
        b.next_obs.col(j) = to_net(tr.next_obs.to_vector());
        b.done[j] = tr.done ? NetScalar(1) : NetScalar(0);
        b.weight[j] = static_cast<NetScalar>(is_weight(tr));
    }
    return b;
}

CriticUpdateResult Td3HdAgent::critic_update(const Batch &batch) {
    const int B = batch.size();
    if (B < 1) throw std::invalid_argument("critic_update: empty batch");
    auto &n = nets_;

    NetMatrix a_next = n.actor_target.forward(batch.next_obs);
    a_next += gaussian(kActionDim, B, cfg_.target_noise_std, cfg_.target_noise_clip, rng_);
    if (projected_) a_next = projection_net_ * a_next;
    a_next = a_next.cwiseMax(NetScalar(-1)).cwiseMin(NetScalar(1));
    const NetMatrix in_next = stack(batch.next_obs, a_next);

    CriticUpdateResult res;
    res.q1_next = n.critic1_target.forward(in_next).row(0).transpose();
    res.q2_next = n.critic2_target.forward(in_next).row(0).transpose();
    res.target.resize(B);
    const auto gamma = static_cast<NetScalar>(cfg_.gamma);
    for (int j = 0; j < B; ++j) {
        res.target[j] = td_target<NetScalar>(batch.reward[j], gamma, batch.done[j] > NetScalar(0.5),
                                              res.q1_next[j], res.q2_next[j]);
    }

    const NetMatrix in = stack(batch.obs, batch.action);
    auto regress = [&](Net &critic, AdamState<NetScalar> &opt) {
        Net::Cache cache;
        const NetMatrix q = critic.forward(in, cache);
        const NetVector diff = q.row(0).transpose() - res.target;
        const double loss =
            static_cast<double>((batch.weight.array() * diff.array().square()).sum()) / B;
        NetMatrix grad(1, B);
        grad.row(0) = (NetScalar(2) / static_cast<NetScalar>(B)) *
                      (batch.weight.array() * diff.array()).matrix().transpose();
        const auto g = critic.backward(cache, grad);
        adam_step(opt, critic, g.params);
        return loss;
    };
    res.loss1 = regress(n.critic1, n.critic1_opt);
    res.loss2 = regress(n.critic2, n.critic2_opt);
    return res;
}

NetMatrix Td3HdAgent::clip_dimension_wise(const NetMatrix &grad, const Vec4 &c) {
    NetMatrix out = grad;
    for (int i = 0; i < out.rows(); ++i) {
        const auto ci = static_cast<NetScalar>(c[i]);
        out.row(i) = out.row(i).cwiseMax(-ci).cwiseMin(ci);
    }
    return out;
}

Vec4 Td3HdAgent::dwc_thresholds(const NetMatrix &grad) {
    const Vec4 fixed = Vec4::Constant(cfg_.dwc_threshold);
    if (!cfg_.dwc_adaptive) return fixed;

    std::array<Vec4, 2> s{Vec4::Zero(), Vec4::Zero()};
    for (int i = 0; i < kActionDim; ++i) {
        s[0][i] = grad.row(i).cast<double>().sum();
        s[1][i] = grad.row(i).cast<double>().squaredNorm();
    }
    grad_window_.push_back(s);
    grad_window_count_.push_back(static_cast<double>(grad.cols()));
    while (static_cast<int>(grad_window_.size()) > cfg_.dwc_window) {
        grad_window_.pop_front();
        grad_window_count_.pop_front();
    }
    Vec4 sum = Vec4::Zero(), sq = Vec4::Zero();
    double count = 0.0;
    for (size_t k = 0; k < grad_window_.size(); ++k) {
        sum += grad_window_[k][0];
        sq += grad_window_[k][1];
        count += grad_window_count_[k];
    }
    Vec4 c;
    for (int i = 0; i < kActionDim; ++i) {
        const double mean = sum[i] / count;
        const double var = std::max(0.0, sq[i] / count - mean * mean);
        const double sd = std::sqrt(var);
        c[i] = sd > 0.0 ? cfg_.dwc_threshold * sd : cfg_.dwc_threshold;
    }
    return c;
}

ActorUpdateResult Td3HdAgent::actor_update_dwc(const Batch &batch) {
    const int B = batch.size();
    if (B < 1) throw std::invalid_argument("actor_update_dwc: empty batch");
    auto &n = nets_;

    Net::Cache actor_cache;
    NetMatrix a = n.actor.forward(batch.obs, actor_cache);
    // Components pushed past the bounds by the projection pass no gradient.
    NetMatrix inside;
    if (projected_) {
        a = projection_net_ * a;
        inside = (a.array().abs() <= NetScalar(1)).cast<NetScalar>();
        a = a.cwiseMax(NetScalar(-1)).cwiseMin(NetScalar(1));
    }
    Net::Cache critic_cache;
    const NetMatrix q = n.critic1.forward(stack(batch.obs, a), critic_cache);
    const NetMatrix d_in = n.critic1.input_gradient(critic_cache, NetMatrix::Ones(1, B));

    ActorUpdateResult res;
    res.loss = -static_cast<double>(q.mean());
    res.grad_pre = d_in.bottomRows(kActionDim);
    if (cfg_.dwc_enabled) {
        res.thresholds = dwc_thresholds(res.grad_pre);
        res.grad_post = clip_dimension_wise(res.grad_pre, res.thresholds);
    } else {
        res.grad_post = res.grad_pre;
    }

    DwcLog &log = dwc_log_;
    ++log.updates;
    for (int j = 0; j < B; ++j) {
        for (int i = 0; i < kActionDim; ++i) {
            const double pre = res.grad_pre(i, j);
            const double post = res.grad_post(i, j);
            const double c = static_cast<NetScalar>(res.thresholds[i]);
            ++log.components;
            log.max_abs_pre = std::max(log.max_abs_pre, std::abs(pre));
            log.max_abs_post = std::max(log.max_abs_post, std::abs(post));
            const bool within = !cfg_.dwc_enabled || std::abs(pre) <= c;
            if (within) {
                if (post != pre) ++log.unsaturated_changed;
            } else {
                ++log.clipped_components;
            }
            if (cfg_.dwc_enabled && std::abs(post) > c) ++log.out_of_bounds;
        }
    }

    // Ascend Q: d(-mean Q)/da = -g / B.
    NetMatrix d_action = -res.grad_post / static_cast<NetScalar>(B);
    if (projected_) {
        d_action = projection_net_.transpose() * d_action.cwiseProduct(inside);
    }
    const auto g = n.actor.backward(actor_cache, d_action);
    adam_step(n.actor_opt, n.actor, g.params);
    return res;
}

void Td3HdAgent::polyak_update(double tau) {
    const auto t = static_cast<NetScalar>(tau);
    nets_.actor.polyak_into(nets_.actor_target, t);
    nets_.critic1.polyak_into(nets_.critic1_target, t);
    nets_.critic2.polyak_into(nets_.critic2_target, t);
}

UpdateStats Td3HdAgent::update(const ReplayBuffer &buffer) {
    const auto B = static_cast<std::size_t>(cfg_.batch_size);
    if (buffer.size() < B) {
        throw std::invalid_argument("Td3HdAgent::update: buffer holds fewer than batch_size transitions");
    }
    const Batch batch = make_batch(buffer, buffer.sample_indices(B, rng_));
    UpdateStats st;
    st.critic = critic_update(batch);
    ++critic_updates_;
    if (!std::isfinite(st.critic.loss1) || !std::isfinite(st.critic.loss2)) {
        throw TrainingDiverged("non-finite critic loss at update " + std::to_string(critic_updates_));
    }
    if (critic_updates_ % static_cast<std::uint64_t>(cfg_.policy_delay) == 0) {
        const ActorUpdateResult ar = actor_update_dwc(batch);
        polyak_update(cfg_.polyak);
        ++actor_updates_;
        st.actor_updated = true;
        st.actor_loss = ar.loss;
        if (!std::isfinite(ar.loss)) {
            throw TrainingDiverged("non-finite actor loss at update " + std::to_string(actor_updates_));
        }
    }
    return st;
}

void Td3HdAgent::set_update_counters(std::uint64_t critic, std::uint64_t actor) {
    critic_updates_ = critic;
    actor_updates_ = actor;
}

std::size_t her_store(const std::vector<Transition> &episode, ReplayBuffer &buffer,
                      const AgentConfig &cfg, const RewardConfig &reward_cfg,
                      std::mt19937_64 &rng) {
    std::size_t added = 0;
    for (const Transition &tr : episode) {
        buffer.add(tr);
        ++added;
    }
    const auto T = episode.size();
    if (!cfg.her_enabled || cfg.her_k <= 0 || T < 2) {
        return added;
    }
    for (std::size_t t = 0; t + 1 < T; ++t) {
        const Transition &tr = episode[t];
        if (!tr.info) {
            throw std::invalid_argument("her_store: transition without info fields");
        }
        std::uniform_int_distribution<std::size_t> pick(t + 1, T - 1);
        for (int k = 0; k < cfg.her_k; ++k) {
            const Transition &future = episode[pick(rng)];
            if (!future.info) {
                throw std::invalid_argument("her_store: transition without info fields");
            }
            const Goal g{future.info->sigma_abs};
            Transition r = tr;
            r.goal = g;
            r.relabeled = true;
            r.obs = make_observation(tr.info->sigma_abs, tr.obs.omega, g);
            r.next_obs = make_observation(tr.info->sigma_abs_next, tr.next_obs.omega, g);
            r.info->e_prev = r.obs.mrp_error.norm();
            r.info->e_curr = r.next_obs.mrp_error.norm();
            r.reward = relabel_reward(tr, g, reward_cfg);
            buffer.add(std::move(r));
            ++added;
        }
    }
    return added;
}

}  // namespace rwctl
