#include "rwctl/telemetry.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rwctl {

namespace {

void put(std::string &s, double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    s.append(buf, r.ptr);
}

double parse_double(const std::string &field, std::size_t row) {
    const char *b = field.data();
    const char *e = b + field.size();
    double v = 0.0;
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e) {
        // from_chars rejects the spellings to_chars uses for non-finite values.
        if (field == "nan" || field == "-nan") return std::numeric_limits<double>::quiet_NaN();
        if (field == "inf") return std::numeric_limits<double>::infinity();
        if (field == "-inf") return -std::numeric_limits<double>::infinity();
        throw std::runtime_error("telemetry row " + std::to_string(row) + ": bad number '" + field + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

int wheels_in_header(const std::vector<std::string> &cols) {
    // 9 fixed columns, then four per wheel.
    if (cols.size() < 9 || (cols.size() - 9) % 4 != 0) {
        throw std::runtime_error("telemetry header has an unexpected column count");
    }
    return static_cast<int>((cols.size() - 9) / 4);
}

}  // namespace

TelemetryRecord make_record(double t, const Observation &obs, const SpacecraftState &state,
                            const StepOutcome &out) {
    TelemetryRecord r;
    r.t = t;
    r.sigma_err = obs.mrp_error;
    r.omega = obs.omega;
    r.error_angle_deg = principal_angle(AttitudeMRP{obs.mrp_error}) * 180.0 / kPi;
    r.tau_cmd = out.tau_cmd;
    r.tau_applied = out.tau_applied;
    r.wheel_speed = state.wheel_speeds;
    r.reward = out.reward;
    r.fault_flags = out.fault_flags;
    return r;
}

std::vector<std::string> telemetry_header(int wheels) {
    std::vector<std::string> h = {"t", "sigma_err_1", "sigma_err_2", "sigma_err_3",
                                  "omega_1", "omega_2", "omega_3", "error_angle_deg"};
    for (const char *group : {"tau_cmd_", "tau_applied_", "wheel_speed_"}) {
        for (int i = 0; i < wheels; ++i) h.push_back(group + std::to_string(i));
    }
    h.emplace_back("reward");
    for (int i = 0; i < wheels; ++i) h.push_back("fault_" + std::to_string(i));
    return h;
}

std::string telemetry_csv(const std::vector<TelemetryRecord> &records) {
    const int n = records.empty() ? 4 : records.front().wheels();
    std::string s;
    const auto header = telemetry_header(n);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i > 0) s += ',';
        s += header[i];
    }
    s += '\n';
    for (const TelemetryRecord &r : records) {
        if (r.wheels() != n || r.tau_applied.size() != n || r.wheel_speed.size() != n ||
            static_cast<int>(r.fault_flags.size()) != n) {
            throw std::runtime_error("telemetry records disagree on the wheel count");
        }
        put(s, r.t);
        for (int i = 0; i < 3; ++i) { s += ','; put(s, r.sigma_err[i]); }
        for (int i = 0; i < 3; ++i) { s += ','; put(s, r.omega[i]); }
        s += ','; put(s, r.error_angle_deg);
        for (const VecX *v : {&r.tau_cmd, &r.tau_applied, &r.wheel_speed}) {
            for (int i = 0; i < n; ++i) { s += ','; put(s, (*v)[i]); }
        }
        s += ','; put(s, r.reward);
        for (int i = 0; i < n; ++i) s += r.fault_flags[static_cast<std::size_t>(i)] ? ",1" : ",0";
        s += '\n';
    }
    return s;
}

void write_telemetry(const std::vector<TelemetryRecord> &records, const std::string &path) {
    const std::string csv = telemetry_csv(records);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << csv;
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<TelemetryRecord> parse_telemetry(const std::string &csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("telemetry is empty");
    const auto header = split(line);
    const int n = wheels_in_header(header);
    if (header != telemetry_header(n)) throw std::runtime_error("telemetry header does not match");
    std::vector<TelemetryRecord> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != header.size()) {
            throw std::runtime_error("telemetry row " + std::to_string(row) + " has " +
                                     std::to_string(f.size()) + " fields");
        }
        std::size_t k = 0;
        auto next = [&] { return parse_double(f[k++], row); };
        TelemetryRecord r;
        r.t = next();
        for (int i = 0; i < 3; ++i) r.sigma_err[i] = next();
        for (int i = 0; i < 3; ++i) r.omega[i] = next();
        r.error_angle_deg = next();
        for (VecX *v : {&r.tau_cmd, &r.tau_applied, &r.wheel_speed}) {
            v->resize(n);
            for (int i = 0; i < n; ++i) (*v)[i] = next();
        }
        r.reward = next();
        for (int i = 0; i < n; ++i) {
            const std::string &flag = f[k++];
            if (flag != "0" && flag != "1") {
                throw std::runtime_error("telemetry row " + std::to_string(row) + ": bad fault flag");
            }
            r.fault_flags.push_back(flag == "1");
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<TelemetryRecord> read_telemetry(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_telemetry(ss.str());
}

}  // namespace rwctl
