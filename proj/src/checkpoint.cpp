#include "rwctl/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rwctl/config.hpp"
#include "rwctl/error.hpp"

namespace rwctl {

namespace {

constexpr char kMagic[6] = {'R', 'W', 'C', 'T', 'L', '1'};

class Writer {
public:
    template <typename T>
    void raw(T v) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
        out_.append(reinterpret_cast<const char *>(b), sizeof(T));
    }
    void u8(std::uint8_t v) { raw(v); }
    void u32(std::uint32_t v) { raw(v); }
    void i32(std::int32_t v) { raw(v); }
    void u64(std::uint64_t v) { raw(v); }
    void f64(double v) { raw(v); }
    void bytes(const char *p, std::size_t n) { out_.append(p, n); }

    [[nodiscard]] std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class Reader {
public:
    explicit Reader(const std::string &s) : s_(s) {}

    template <typename T>
    T raw() {
        need(sizeof(T));
        unsigned char b[sizeof(T)];
        std::memcpy(b, s_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
    std::uint8_t u8() { return raw<std::uint8_t>(); }
    std::uint32_t u32() { return raw<std::uint32_t>(); }
    std::int32_t i32() { return raw<std::int32_t>(); }
    std::uint64_t u64() { return raw<std::uint64_t>(); }
    double f64() { return raw<double>(); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string out = s_.substr(pos_, n);
        pos_ += n;
        return out;
    }

    void need(std::size_t n) const {
        if (s_.size() - pos_ < n) {
            throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos_));
        }
    }
    [[nodiscard]] bool at_end() const { return pos_ == s_.size(); }

private:
    const std::string &s_;
    std::size_t pos_ = 0;
};

void write_net(Writer &w, const Net &net) {
    w.u32(static_cast<std::uint32_t>(net.sizes().size()));
    for (int s : net.sizes()) w.i32(s);
    w.u8(static_cast<std::uint8_t>(net.hidden_activation()));
    w.u8(static_cast<std::uint8_t>(net.output_activation()));
    const NetVector &p = net.parameters();
    w.u64(static_cast<std::uint64_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) w.f64(static_cast<double>(p[i]));
}

// Reads into a copy of `like`, which fixes the expected shape.
Net read_net(Reader &r, const Net &like, const char *name) {
    const std::uint32_t n = r.u32();
    if (n != like.sizes().size()) {
        throw CheckpointError(std::string(name) + ": layer count differs from the configured network");
    }
    for (std::uint32_t i = 0; i < n; ++i) {
        if (r.i32() != like.sizes()[i]) {
            throw CheckpointError(std::string(name) + ": layer sizes differ from the configured network");
        }
    }
    const auto hidden = r.u8();
    const auto output = r.u8();
    if (hidden != static_cast<std::uint8_t>(like.hidden_activation()) ||
        output != static_cast<std::uint8_t>(like.output_activation())) {
        throw CheckpointError(std::string(name) + ": activations differ from the configured network");
    }
    const std::uint64_t count = r.u64();
    if (count != static_cast<std::uint64_t>(like.parameter_count())) {
        throw CheckpointError(std::string(name) + ": parameter count differs");
    }
    r.need(count * sizeof(double));
    Net net = like;
    NetVector &p = net.mutable_parameters();
    for (std::uint64_t i = 0; i < count; ++i) {
        p[static_cast<Eigen::Index>(i)] = static_cast<NetScalar>(r.f64());
    }
    return net;
}

void write_adam(Writer &w, const AdamState<NetScalar> &a) {
    w.f64(a.learning_rate);
    w.f64(a.beta1);
    w.f64(a.beta2);
    w.f64(a.epsilon);
    w.u64(a.step);
    w.u64(static_cast<std::uint64_t>(a.m.size()));
    for (Eigen::Index i = 0; i < a.m.size(); ++i) w.f64(static_cast<double>(a.m[i]));
    for (Eigen::Index i = 0; i < a.v.size(); ++i) w.f64(static_cast<double>(a.v[i]));
}

AdamState<NetScalar> read_adam(Reader &r, Eigen::Index expected, const char *name) {
    AdamState<NetScalar> a;
    a.learning_rate = r.f64();
    a.beta1 = r.f64();
    a.beta2 = r.f64();
    a.epsilon = r.f64();
    a.step = r.u64();
    const std::uint64_t n = r.u64();
    if (n != static_cast<std::uint64_t>(expected)) {
        throw CheckpointError(std::string(name) + ": optimizer state length differs");
    }
    r.need(2 * n * sizeof(double));
    a.m.resize(expected);
    a.v.resize(expected);
    for (Eigen::Index i = 0; i < expected; ++i) a.m[i] = static_cast<NetScalar>(r.f64());
    for (Eigen::Index i = 0; i < expected; ++i) a.v[i] = static_cast<NetScalar>(r.f64());
    return a;
}

}  // namespace

std::string serialize_checkpoint(const Td3HdAgent &agent) {
    Writer w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kCheckpointVersion);
    w.u64(agent_config_hash(agent.config()));
    w.u64(agent.critic_updates());
    w.u64(agent.actor_updates());
    const Eigen::Matrix4d &P = agent.action_projection();
    for (Eigen::Index i = 0; i < P.size(); ++i) w.f64(P.data()[i]);
    const ActorCritic &n = agent.networks();
    for (const Net *net : {&n.actor, &n.critic1, &n.critic2, &n.actor_target, &n.critic1_target,
                           &n.critic2_target}) {
        write_net(w, *net);
    }
    for (const AdamState<NetScalar> *a : {&n.actor_opt, &n.critic1_opt, &n.critic2_opt}) {
        write_adam(w, *a);
    }
    return w.take();
}

void deserialize_checkpoint(const std::string &bytes, Td3HdAgent &agent) {
    Reader r(bytes);
    if (r.bytes(sizeof kMagic) != std::string(kMagic, sizeof kMagic)) {
        throw CheckpointError("not an RWCTL1 checkpoint (bad magic)");
    }
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    const std::uint64_t hash = r.u64();
    const std::uint64_t expected = agent_config_hash(agent.config());
    if (hash != expected) {
        std::ostringstream msg;
        msg << "checkpoint was written for a different agent configuration (hash " << std::hex
            << hash << ", expected " << expected << ")";
        throw CheckpointError(msg.str());
    }
    const std::uint64_t critic_updates = r.u64();
    const std::uint64_t actor_updates = r.u64();
    Eigen::Matrix4d P;
    for (Eigen::Index i = 0; i < P.size(); ++i) P.data()[i] = r.f64();
    if (!P.allFinite()) throw CheckpointError("checkpoint action projection is not finite");

    const ActorCritic &cur = agent.networks();
    ActorCritic next;
    next.actor = read_net(r, cur.actor, "actor");
    next.critic1 = read_net(r, cur.critic1, "critic1");
    next.critic2 = read_net(r, cur.critic2, "critic2");
    next.actor_target = read_net(r, cur.actor_target, "actor_target");
    next.critic1_target = read_net(r, cur.critic1_target, "critic1_target");
    next.critic2_target = read_net(r, cur.critic2_target, "critic2_target");
    next.actor_opt = read_adam(r, cur.actor.parameter_count(), "actor");
    next.critic1_opt = read_adam(r, cur.critic1.parameter_count(), "critic1");
    next.critic2_opt = read_adam(r, cur.critic2.parameter_count(), "critic2");
    if (!r.at_end()) throw CheckpointError("checkpoint has trailing bytes");

    agent.mutable_networks() = std::move(next);
    agent.set_update_counters(critic_updates, actor_updates);
    agent.set_action_projection(P);
}

void save_checkpoint(const Td3HdAgent &agent, const std::string &path) {
    const std::string bytes = serialize_checkpoint(agent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw CheckpointError("write to '" + path + "' failed");
}

void load_checkpoint(const std::string &path, Td3HdAgent &agent) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    deserialize_checkpoint(ss.str(), agent);
}

}  // namespace rwctl
