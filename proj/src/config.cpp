#include "rwctl/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rwctl/error.hpp"

namespace rwctl {

namespace {

constexpr double kDeg = kPi / 180.0;

int line_of(const YAML::Node &n) {
    if (!n.IsDefined()) return 0;
    const YAML::Mark m = n.Mark();
    return m.is_null() ? 0 : m.line + 1;
}

template <typename T>
std::string type_name();
template <> std::string type_name<double>() { return "a number"; }
template <> std::string type_name<int>() { return "an integer"; }
template <> std::string type_name<std::uint64_t>() { return "a non-negative integer"; }
template <> std::string type_name<bool>() { return "true or false"; }
template <> std::string type_name<std::string>() { return "a string"; }

template <typename T>
T convert(const YAML::Node &n, const std::string &path) {
    if (!n.IsScalar()) throw ConfigError(path + " must be " + type_name<T>(), line_of(n));
    try {
        return n.as<T>();
    } catch (const YAML::Exception &) {
        throw ConfigError(path + " must be " + type_name<T>(), line_of(n));
    }
}

// One mapping of the file. Every key read is remembered so the rest can be
// reported as unknown.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) {
            throw ConfigError(label() + " must be a mapping", line_of(node_));
        }
    }

    [[nodiscard]] bool present() const { return node_ && node_.IsMap(); }
    [[nodiscard]] int line() const { return line_of(node_); }

    // Const lookups yield an undefined node for missing keys; a default
    // YAML::Node would read as a defined null.
    YAML::Node take(const std::string &key) {
        seen_.insert(key);
        static const YAML::Node empty = YAML::Load("{}");
        const YAML::Node &src = present() ? node_ : empty;
        return src[key];
    }

    template <typename T>
    bool get(const std::string &key, T &dst,
             const std::function<bool(const T &)> &ok = {}, const std::string &rule = {}) {
        const YAML::Node n = take(key);
        if (!n) return false;
        T v = convert<T>(n, full(key));
        if (ok && !ok(v)) throw ConfigError(full(key) + " " + rule, line_of(n));
        dst = v;
        return true;
    }

    Section sub(const std::string &key) { return Section(take(key), full(key)); }

    void finish() const {
        if (!present()) return;
        for (const auto &kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (seen_.count(key) == 0) {
                throw ConfigError("unknown key '" + full(key) + "'", line_of(kv.first));
            }
        }
    }

    [[nodiscard]] std::string full(const std::string &key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    [[nodiscard]] std::string label() const { return path_.empty() ? "document" : path_; }

    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

const auto positive = [](const double &v) { return v > 0.0 && std::isfinite(v); };
const auto non_negative = [](const double &v) { return v >= 0.0 && std::isfinite(v); };
const auto at_least_one = [](const int &v) { return v >= 1; };

// Rethrows validation failures at the line of the section that holds the values.
template <typename F>
void anchored(int line, F &&f) {
    try {
        f();
    } catch (const ConfigError &e) {
        if (e.line() > 0) throw;
        throw ConfigError(e.what(), line);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what(), line);
    }
}

Vec3 parse_vec3(const YAML::Node &n, const std::string &path) {
    if (!n.IsSequence() || n.size() != 3) {
        throw ConfigError(path + " must be a list of three numbers", line_of(n));
    }
    Vec3 v;
    for (int i = 0; i < 3; ++i) v[i] = convert<double>(n[i], path);
    return v;
}

InertiaMatrix parse_inertia(const YAML::Node &n, const std::string &path) {
    if (!n.IsSequence() || n.size() != 3) {
        throw ConfigError(path + " must list a diagonal [jx, jy, jz] or three rows", line_of(n));
    }
    Mat3 J = Mat3::Zero();
    if (n[0].IsSequence()) {
        for (int r = 0; r < 3; ++r) J.row(r) = parse_vec3(n[r], path).transpose();
    } else {
        J = parse_vec3(n, path).asDiagonal();
    }
    try {
        return InertiaMatrix(J);
    } catch (const std::invalid_argument &e) {
        throw ConfigError(path + ": " + e.what(), line_of(n));
    }
}

FaultSchedule parse_faults(const YAML::Node &n, const std::string &path) {
    if (n.IsNull()) return FaultSchedule();
    if (!n.IsSequence()) {
        throw ConfigError(path + " must be a list of {wheel, time} entries", line_of(n));
    }
    std::vector<FaultEvent> events;
    for (std::size_t i = 0; i < n.size(); ++i) {
        Section s(n[i], path + "[" + std::to_string(i) + "]");
        if (!s.present()) throw ConfigError(path + " entries must be mappings", line_of(n[i]));
        FaultEvent ev;
        if (!s.get<int>("wheel", ev.wheel, [](const int &w) { return w >= 0; }, "must be >= 0")) {
            throw ConfigError(s.full("wheel") + " is required", s.line());
        }
        if (!s.get<double>("time", ev.time, non_negative, "must be >= 0")) {
            throw ConfigError(s.full("time") + " is required", s.line());
        }
        s.finish();
        events.push_back(ev);
    }
    try {
        return FaultSchedule(std::move(events));
    } catch (const std::invalid_argument &e) {
        throw ConfigError(path + ": " + e.what(), line_of(n));
    }
}

void parse_model(Section &s, SpacecraftModel &m) {
    if (const YAML::Node n = s.take("inertia")) m.inertia = parse_inertia(n, s.full("inertia"));
    Section w = s.sub("wheels");
    WheelParams &p = m.wheels;
    w.get<double>("inertia", p.inertia, positive, "must be > 0");
    double rpm = p.speed_max / kRpmToRadS;
    if (w.get<double>("speed_max_rpm", rpm, positive, "must be > 0")) p.speed_max = rpm * kRpmToRadS;
    w.get<double>("torque_max", p.torque_max, positive, "must be > 0");
    double beta_deg = p.beta / kDeg;
    if (w.get<double>("beta_deg", beta_deg, [](const double &b) { return b > 0.0 && b < 90.0; },
                      "must lie in (0, 90)")) {
        p.beta = beta_deg * kDeg;
    }
    w.get<bool>("backup", p.has_backup);
    w.finish();
    s.get<bool>("wheel_gyroscopic_coupling", m.wheel_gyroscopic_coupling);
    s.get<double>("omega_cap", m.omega_cap, positive, "must be > 0");
}

void parse_scenario(Section s, ScenarioConfig &c) {
    parse_model(s, c.model);
    s.get<double>("duration", c.duration, positive, "must be > 0");
    if (const YAML::Node n = s.take("faults")) c.faults = parse_faults(n, s.full("faults"));
    double deg = c.initial_angle_max / kDeg;
    if (s.get<double>("initial_angle_max_deg", deg,
                      [](const double &d) { return d >= 0.0 && d <= 180.0; }, "must lie in [0, 180]")) {
        c.initial_angle_max = deg * kDeg;
    }
    s.get<double>("initial_omega_max", c.initial_omega_max, non_negative, "must be >= 0");
    if (const YAML::Node n = s.take("goal")) {
        c.goal = parse_vec3(n, s.full("goal"));
        if (c.goal.norm() > 1.0) throw ConfigError(s.full("goal") + " must have |sigma| <= 1", line_of(n));
    }
    if (const YAML::Node n = s.take("backup_policy")) {
        const auto str = convert<std::string>(n, s.full("backup_policy"));
        anchored(line_of(n), [&] { c.backup = parse_backup_policy(str); });
    }
    s.get<int>("backup_saturation_steps", c.backup_saturation_steps, at_least_one, "must be >= 1");
    s.finish();
    anchored(s.line(), [&] { c.faults.validate_for(c.model.wheels.count()); });
}

void parse_reward(Section s, RewardConfig &r) {
    s.get<double>("accuracy_threshold", r.accuracy_threshold, non_negative, "must be >= 0");
    s.get<double>("omega_threshold", r.omega_threshold, non_negative, "must be >= 0");
    s.get<double>("omega_penalty", r.omega_penalty);
    s.get<double>("accuracy_bonus", r.accuracy_bonus);
    s.get<bool>("sparse", r.sparse);
    s.finish();
}

void parse_environment(Section s, EpisodeConfig &e, int n_wheels) {
    s.get<int>("n_steps", e.n_steps, at_least_one, "must be >= 1");
    s.get<double>("control_dt", e.control_dt, positive, "must be > 0");
    s.get<int>("substeps", e.substeps, at_least_one, "must be >= 1");
    const auto angle = [](const double &d) { return d >= 0.0 && d <= 180.0; };
    double deg = e.initial_angle_max / kDeg;
    if (s.get<double>("initial_angle_max_deg", deg, angle, "must lie in [0, 180]")) {
        e.initial_angle_max = deg * kDeg;
    }
    s.get<double>("initial_omega_max", e.initial_omega_max, non_negative, "must be >= 0");
    s.get<bool>("random_goal", e.random_goal);
    deg = e.goal_angle_max / kDeg;
    if (s.get<double>("goal_angle_max_deg", deg, angle, "must lie in [0, 180]")) {
        e.goal_angle_max = deg * kDeg;
    }
    if (const YAML::Node n = s.take("faults")) e.fault_schedule = parse_faults(n, s.full("faults"));
    parse_reward(s.sub("reward"), e.reward);
    s.finish();
    anchored(s.line(), [&] {
        e.validate();
        e.fault_schedule.validate_for(n_wheels);
    });
}

void parse_agent(Section s, AgentSection &a) {
    if (const YAML::Node n = s.take("kind")) {
        const auto str = convert<std::string>(n, s.full("kind"));
        anchored(line_of(n), [&] { a.set_kind(parse_agent_kind(str)); });
    }
    AgentConfig &c = a.td3;
    const auto unit = [](const double &v) { return v > 0.0 && v <= 1.0; };
    s.get<double>("gamma", c.gamma, unit, "must lie in (0, 1]");
    s.get<int>("batch_size", c.batch_size, at_least_one, "must be >= 1");
    s.get<int>("policy_delay", c.policy_delay, at_least_one, "must be >= 1");
    s.get<double>("polyak", c.polyak, unit, "must lie in (0, 1]");
    s.get<double>("exploration_noise_std", c.exploration_noise_std, non_negative, "must be >= 0");
    s.get<double>("target_noise_std", c.target_noise_std, non_negative, "must be >= 0");
    s.get<double>("target_noise_clip", c.target_noise_clip, non_negative, "must be >= 0");
    s.get<double>("dwc_threshold", c.dwc_threshold, positive, "must be > 0");
    s.get<bool>("dwc_adaptive", c.dwc_adaptive);
    s.get<int>("dwc_window", c.dwc_window, at_least_one, "must be >= 1");
    s.get<int>("her_k", c.her_k, [](const int &k) { return k >= 0; }, "must be >= 0");
    if (const YAML::Node n = s.take("her_strategy")) {
        if (convert<std::string>(n, s.full("her_strategy")) != "future") {
            throw ConfigError(s.full("her_strategy") + " must be 'future'", line_of(n));
        }
    }
    s.get<double>("alpha_is", c.alpha_is, non_negative, "must be >= 0");
    s.get<bool>("her", c.her_enabled);
    s.get<bool>("dwc", c.dwc_enabled);
    s.get<double>("learning_rate", c.learning_rate, positive, "must be > 0");
    if (const YAML::Node n = s.take("hidden")) {
        if (!n.IsSequence() || n.size() == 0) {
            throw ConfigError(s.full("hidden") + " must be a non-empty list of layer widths", line_of(n));
        }
        c.hidden.clear();
        for (const auto &h : n) {
            const int w = convert<int>(h, s.full("hidden"));
            if (w < 1) throw ConfigError(s.full("hidden") + " widths must be >= 1", line_of(h));
            c.hidden.push_back(w);
        }
    }
    std::uint64_t cap = c.buffer_capacity;
    if (s.get<std::uint64_t>("buffer_capacity", cap)) c.buffer_capacity = cap;
    s.get<double>("actor_last_layer_scale", c.actor_last_layer_scale, positive, "must be > 0");
    s.get<bool>("project_actions", c.project_actions);
    Section pd = s.sub("pd");
    pd.get<double>("kp", a.pd.kp, positive, "must be > 0");
    pd.get<double>("kd", a.pd.kd, positive, "must be > 0");
    pd.finish();
    s.finish();
    anchored(s.line(), [&] { c.validate(); });
}

void parse_training(Section s, TrainingConfig &t) {
    s.get<std::uint64_t>("total_steps", t.total_steps);
    s.get<std::uint64_t>("warmup_steps", t.warmup_steps);
    s.get<std::uint64_t>("eval_interval", t.eval_interval);
    s.get<int>("eval_episodes", t.eval_episodes, at_least_one, "must be >= 1");
    s.get<std::uint64_t>("eval_seed_base", t.eval_seed_base);
    s.finish();
    anchored(s.line(), [&] { t.validate(); });
}

// Shortest text that parses back to the same double.
std::string num(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// Degrees and rpm are converted from radians, so 15 digits hide the
// conversion residue (60 rather than 59.999999999999993).
std::string converted(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
    return std::string(buf, r.ptr);
}

void emit_faults(YAML::Emitter &out, const FaultSchedule &f) {
    out << YAML::BeginSeq;
    for (const FaultEvent &ev : f.events()) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "wheel" << YAML::Value << ev.wheel
            << YAML::Key << "time" << YAML::Value << num(ev.time) << YAML::EndMap;
    }
    out << YAML::EndSeq;
}

void emit_vec3(YAML::Emitter &out, const Vec3 &v) {
    out << YAML::Flow << YAML::BeginSeq << num(v[0]) << num(v[1]) << num(v[2]) << YAML::EndSeq;
}

void emit_agent_body(YAML::Emitter &out, const AgentConfig &c) {
    out << YAML::Key << "gamma" << YAML::Value << num(c.gamma);
    out << YAML::Key << "batch_size" << YAML::Value << c.batch_size;
    out << YAML::Key << "policy_delay" << YAML::Value << c.policy_delay;
    out << YAML::Key << "polyak" << YAML::Value << num(c.polyak);
    out << YAML::Key << "exploration_noise_std" << YAML::Value << num(c.exploration_noise_std);
    out << YAML::Key << "target_noise_std" << YAML::Value << num(c.target_noise_std);
    out << YAML::Key << "target_noise_clip" << YAML::Value << num(c.target_noise_clip);
    out << YAML::Key << "dwc_threshold" << YAML::Value << num(c.dwc_threshold);
    out << YAML::Key << "dwc_adaptive" << YAML::Value << c.dwc_adaptive;
    out << YAML::Key << "dwc_window" << YAML::Value << c.dwc_window;
    out << YAML::Key << "her_k" << YAML::Value << c.her_k;
    out << YAML::Key << "her_strategy" << YAML::Value << "future";
    out << YAML::Key << "alpha_is" << YAML::Value << num(c.alpha_is);
    out << YAML::Key << "her" << YAML::Value << c.her_enabled;
    out << YAML::Key << "dwc" << YAML::Value << c.dwc_enabled;
    out << YAML::Key << "learning_rate" << YAML::Value << num(c.learning_rate);
    out << YAML::Key << "hidden" << YAML::Value << YAML::Flow << c.hidden;
    out << YAML::Key << "buffer_capacity" << YAML::Value
        << static_cast<unsigned long long>(c.buffer_capacity);
    out << YAML::Key << "actor_last_layer_scale" << YAML::Value << num(c.actor_last_layer_scale);
    out << YAML::Key << "project_actions" << YAML::Value << c.project_actions;
}

}  // namespace

int ScenarioConfig::steps(double control_dt) const {
    return static_cast<int>(std::llround(duration / control_dt));
}

std::optional<double> ScenarioConfig::first_fault() const {
    std::optional<double> t;
    for (const FaultEvent &ev : faults.events()) {
        if (!t || ev.time < *t) t = ev.time;
    }
    return t;
}

AgentKind parse_agent_kind(const std::string &s) {
    if (s == "pd") return AgentKind::Pd;
    if (s == "td3") return AgentKind::Td3;
    if (s == "td3-hd") return AgentKind::Td3Hd;
    throw ConfigError("unknown agent '" + s + "' (pd|td3|td3-hd)");
}

std::string to_string(AgentKind k) {
    switch (k) {
        case AgentKind::Pd: return "pd";
        case AgentKind::Td3: return "td3";
        case AgentKind::Td3Hd: return "td3-hd";
    }
    return "pd";
}

void AgentSection::set_kind(AgentKind k) {
    kind = k;
    if (k == AgentKind::Td3) {
        td3.her_enabled = false;
        td3.dwc_enabled = false;
    } else if (k == AgentKind::Td3Hd) {
        td3.her_enabled = true;
        td3.dwc_enabled = true;
    }
}

std::string AgentSection::variant() const {
    return kind == AgentKind::Pd ? "pd" : td3.variant();
}

EpisodeConfig RunConfig::default_training_episode() {
    EpisodeConfig e;
    e.fault_schedule = FaultSchedule({{0, 50.0}});
    return e;
}

void RunConfig::validate() const {
    scenario.model.wheels.validate();
    if (!(scenario.duration > 0.0)) throw ConfigError("scenario.duration must be > 0");
    if (scenario.steps(environment.control_dt) < 1) {
        throw ConfigError("scenario.duration is shorter than one control step");
    }
    scenario.faults.validate_for(scenario.model.wheels.count());
    environment.validate();
    environment.fault_schedule.validate_for(scenario.model.wheels.count());
    agent.td3.validate();
    agent.pd.validate();
    training.validate();
    if (seeds.empty()) throw ConfigError("seeds must list at least one seed");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig parse_config(const std::string &yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception &e) {
        throw ConfigError(e.msg, e.mark.is_null() ? 0 : e.mark.line + 1);
    }
    RunConfig cfg;
    Section top(root, "");
    parse_scenario(top.sub("scenario"), cfg.scenario);
    parse_environment(top.sub("environment"), cfg.environment, cfg.scenario.model.wheels.count());
    parse_agent(top.sub("agent"), cfg.agent);
    parse_training(top.sub("training"), cfg.training);
    if (const YAML::Node n = top.take("seeds")) {
        if (!n.IsSequence() || n.size() == 0) {
            throw ConfigError("seeds must be a non-empty list", line_of(n));
        }
        cfg.seeds.clear();
        for (const auto &s : n) cfg.seeds.push_back(convert<std::uint64_t>(s, "seeds"));
    }
    top.get<std::string>("output_dir", cfg.output_dir,
                         [](const std::string &s) { return !s.empty(); }, "must not be empty");
    top.finish();
    anchored(top.line(), [&] { cfg.validate(); });
    return cfg;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_yaml(const RunConfig &cfg) {
    YAML::Emitter out;
    out << YAML::BeginMap;

    const ScenarioConfig &sc = cfg.scenario;
    const SpacecraftModel &m = sc.model;
    out << YAML::Key << "scenario" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "inertia" << YAML::Value << YAML::BeginSeq;
    for (int r = 0; r < 3; ++r) {
        out << YAML::Flow << YAML::BeginSeq;
        for (int c = 0; c < 3; ++c) out << num(m.inertia.matrix()(r, c));
        out << YAML::EndSeq;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "wheels" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "inertia" << YAML::Value << num(m.wheels.inertia);
    out << YAML::Key << "speed_max_rpm" << YAML::Value << converted(m.wheels.speed_max / kRpmToRadS);
    out << YAML::Key << "torque_max" << YAML::Value << num(m.wheels.torque_max);
    out << YAML::Key << "beta_deg" << YAML::Value << converted(m.wheels.beta / kDeg);
    out << YAML::Key << "backup" << YAML::Value << m.wheels.has_backup;
    out << YAML::EndMap;
    out << YAML::Key << "wheel_gyroscopic_coupling" << YAML::Value << m.wheel_gyroscopic_coupling;
    out << YAML::Key << "omega_cap" << YAML::Value << num(m.omega_cap);
    out << YAML::Key << "duration" << YAML::Value << num(sc.duration);
    out << YAML::Key << "faults" << YAML::Value;
    emit_faults(out, sc.faults);
    out << YAML::Key << "initial_angle_max_deg" << YAML::Value << converted(sc.initial_angle_max / kDeg);
    out << YAML::Key << "initial_omega_max" << YAML::Value << num(sc.initial_omega_max);
    out << YAML::Key << "goal" << YAML::Value;
    emit_vec3(out, sc.goal);
    out << YAML::Key << "backup_policy" << YAML::Value << to_string(sc.backup);
    out << YAML::Key << "backup_saturation_steps" << YAML::Value << sc.backup_saturation_steps;
    out << YAML::EndMap;

    const EpisodeConfig &e = cfg.environment;
    out << YAML::Key << "environment" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "n_steps" << YAML::Value << e.n_steps;
    out << YAML::Key << "control_dt" << YAML::Value << num(e.control_dt);
    out << YAML::Key << "substeps" << YAML::Value << e.substeps;
    out << YAML::Key << "initial_angle_max_deg" << YAML::Value << converted(e.initial_angle_max / kDeg);
    out << YAML::Key << "initial_omega_max" << YAML::Value << num(e.initial_omega_max);
    out << YAML::Key << "random_goal" << YAML::Value << e.random_goal;
    out << YAML::Key << "goal_angle_max_deg" << YAML::Value << converted(e.goal_angle_max / kDeg);
    out << YAML::Key << "faults" << YAML::Value;
    emit_faults(out, e.fault_schedule);
    out << YAML::Key << "reward" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "accuracy_threshold" << YAML::Value << num(e.reward.accuracy_threshold);
    out << YAML::Key << "omega_threshold" << YAML::Value << num(e.reward.omega_threshold);
    out << YAML::Key << "omega_penalty" << YAML::Value << num(e.reward.omega_penalty);
    out << YAML::Key << "accuracy_bonus" << YAML::Value << num(e.reward.accuracy_bonus);
    out << YAML::Key << "sparse" << YAML::Value << e.reward.sparse;
    out << YAML::EndMap;
    out << YAML::EndMap;

    out << YAML::Key << "agent" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << to_string(cfg.agent.kind);
    emit_agent_body(out, cfg.agent.td3);
    out << YAML::Key << "pd" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kp" << YAML::Value << num(cfg.agent.pd.kp);
    out << YAML::Key << "kd" << YAML::Value << num(cfg.agent.pd.kd);
    out << YAML::EndMap;
    out << YAML::EndMap;

    const TrainingConfig &t = cfg.training;
    out << YAML::Key << "training" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "total_steps" << YAML::Value << static_cast<unsigned long long>(t.total_steps);
    out << YAML::Key << "warmup_steps" << YAML::Value << static_cast<unsigned long long>(t.warmup_steps);
    out << YAML::Key << "eval_interval" << YAML::Value << static_cast<unsigned long long>(t.eval_interval);
    out << YAML::Key << "eval_episodes" << YAML::Value << t.eval_episodes;
    out << YAML::Key << "eval_seed_base" << YAML::Value
        << static_cast<unsigned long long>(t.eval_seed_base);
    out << YAML::EndMap;

    out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (std::uint64_t s : cfg.seeds) out << static_cast<unsigned long long>(s);
    out << YAML::EndSeq;
    out << YAML::Key << "output_dir" << YAML::Value << cfg.output_dir;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::uint64_t fnv1a64(const std::string &bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t agent_config_hash(const AgentConfig &cfg) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    emit_agent_body(out, cfg);
    out << YAML::EndMap;
    return fnv1a64(out.c_str());
}

void apply_overrides(RunConfig &cfg, const Overrides &o) {
    if (o.agent) cfg.agent.set_kind(parse_agent_kind(*o.agent));
    if (o.no_her) cfg.agent.td3.her_enabled = false;
    if (o.no_dwc) cfg.agent.td3.dwc_enabled = false;
    if (o.fault_time) {
        if (!(*o.fault_time >= 0.0)) throw ConfigError("--fault-time must be >= 0");
        std::vector<FaultEvent> events = cfg.scenario.faults.events();
        if (events.empty()) events.push_back({0, 0.0});
        for (FaultEvent &ev : events) ev.time = *o.fault_time;
        cfg.scenario.faults = FaultSchedule(std::move(events));
    }
    if (o.duration) {
        if (!(*o.duration > 0.0)) throw ConfigError("--duration must be > 0");
        cfg.scenario.duration = *o.duration;
    }
    if (o.seed) cfg.seeds = {*o.seed};
    if (o.out) cfg.output_dir = *o.out;
    cfg.validate();
}

}  // namespace rwctl
