#include "syncslam/records.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

#ifndef SYNCSLAM_GIT_DESCRIBE
#define SYNCSLAM_GIT_DESCRIBE "unknown"
#endif

namespace syncslam {

using nlohmann::json;

namespace {

json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

Vec2 to_vec(const json& j) {
    if (!j.is_array() || j.size() != 2) throw std::runtime_error("records: expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string git_describe() { return SYNCSLAM_GIT_DESCRIBE; }

std::string truth_to_json(const GroundTruth& truth) {
    json root;
    root["schema"] = "syncslam.truth";
    root["version"] = kSchemaVersion;
    json vas = json::array();
    for (const VirtualAnchor& va : truth.vas)
        vas.push_back({{"bs_id", va.bs_id}, {"wall_id", va.wall_id}, {"position", vec(va.position)}});
    root["vas"] = vas;
    json mt = json::array();
    for (const auto& step : truth.mt) {
        json row = json::array();
        for (const MtState& s : step)
            row.push_back({{"position", vec(s.position)},
                           {"orientation", s.orientation},
                           {"velocity", vec(s.velocity)},
                           {"bias", s.bias}});
        mt.push_back(row);
    }
    root["mt"] = mt;
    root["bs_bias"] = truth.bs_bias;
    json labels = json::array();
    for (const auto& step : truth.labels) {
        json row = json::array();
        for (const auto& per_mt : step) {
            json l = json::array();
            for (const OriginLabel& o : per_mt) l.push_back(json::array({o.bs_id, o.feature}));
            row.push_back(l);
        }
        labels.push_back(row);
    }
    root["labels"] = labels;
    return root.dump() + "\n";
}

GroundTruth truth_from_json(const std::string& text) {
    GroundTruth t;
    try {
        const json root = json::parse(text);
        if (root.at("schema") != "syncslam.truth" || root.at("version") != kSchemaVersion)
            throw std::runtime_error("truth: unsupported schema");
        for (const json& v : root.at("vas"))
            t.vas.push_back({v.at("bs_id").get<std::size_t>(), v.at("wall_id").get<std::size_t>(), to_vec(v.at("position"))});
        for (const json& row : root.at("mt")) {
            std::vector<MtState> step;
            for (const json& s : row)
                step.push_back({to_vec(s.at("position")), s.at("orientation").get<double>(), to_vec(s.at("velocity")),
                                s.at("bias").get<double>()});
            t.mt.push_back(std::move(step));
        }
        t.bs_bias = root.at("bs_bias").get<std::vector<std::vector<double>>>();
        for (const json& row : root.at("labels")) {
            std::vector<std::vector<OriginLabel>> step;
            for (const json& per_mt : row) {
                std::vector<OriginLabel> l;
                for (const json& o : per_mt) l.push_back({o.at(0).get<std::size_t>(), o.at(1).get<std::size_t>()});
                step.push_back(std::move(l));
            }
            t.labels.push_back(std::move(step));
        }
    } catch (const json::exception& ex) {
        throw std::runtime_error(std::string("truth: malformed record: ") + ex.what());
    }
    return t;
}

void write_measurements(std::ostream& os, const MeasurementLog& log) {
    const std::size_t n_mt = log.empty() ? 0 : log[0].size();
    json header{{"schema", kMeasurementsSchema},
                {"version", kSchemaVersion},
                {"n_steps", log.empty() ? 0 : log.size() - 1},
                {"n_mt", n_mt}};
    os << header.dump() << '\n';
    for (std::size_t n = 1; n < log.size(); ++n) {
        for (std::size_t i = 0; i < log[n].size(); ++i) {
            json z = json::array();
            for (const Measurement& m : log[n][i]) z.push_back(json::array({m.z_d, m.z_phi, m.z_theta, m.z_u}));
            os << json{{"step", n}, {"mt", i + 1}, {"z", z}}.dump() << '\n';
        }
    }
}

MeasurementLog read_measurements(std::istream& is, std::size_t n_mt, std::size_t n_steps) {
    MeasurementLog log(n_steps + 1, std::vector<std::vector<Measurement>>(n_mt));
    std::string line;
    bool header = false;
    std::size_t line_no = 0;
    try {
        while (std::getline(is, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            const json j = json::parse(line);
            if (!header) {
                if (j.value("schema", "") != kMeasurementsSchema || j.value("version", 0) != kSchemaVersion)
                    throw std::runtime_error("measurements: unsupported schema or version");
                if (j.at("n_mt").get<std::size_t>() != n_mt)
                    throw std::runtime_error("measurements: MT count does not match the scenario");
                header = true;
                continue;
            }
            const std::size_t n = j.at("step").get<std::size_t>();
            const std::size_t i = j.at("mt").get<std::size_t>();
            if (n == 0 || n > n_steps || i == 0 || i > n_mt)
                throw std::runtime_error("measurements: record (step, mt) out of range at line " +
                                         std::to_string(line_no));
            auto& set = log[n][i - 1];
            set.clear();
            for (const json& z : j.at("z")) {
                if (!z.is_array() || z.size() != 4) throw std::runtime_error("measurements: z entries need 4 values");
                set.push_back({z[0].get<double>(), z[1].get<double>(), z[2].get<double>(), z[3].get<double>()});
            }
        }
    } catch (const json::exception& ex) {
        throw std::runtime_error("measurements: malformed record at line " + std::to_string(line_no) + ": " +
                                 ex.what());
    }
    return log;
}

void write_estimates(std::ostream& os, const Estimates& est) {
    os << json{{"step", est.step}, {"type", "step"}, {"hypotheses", est.hypotheses}, {"confirmed", est.confirmed.size()}}
              .dump()
       << '\n';
    for (std::size_t i = 0; i < est.mts.size(); ++i) {
        const MtEstimate& m = est.mts[i];
        os << json{{"step", est.step},
                   {"type", "mt"},
                   {"id", i + 1},
                   {"position", vec(m.position)},
                   {"orientation", m.orientation},
                   {"velocity", vec(m.velocity)},
                   {"bias", m.bias}}
                  .dump()
           << '\n';
    }
    for (std::size_t j = 0; j < est.bs_bias.size(); ++j)
        os << json{{"step", est.step}, {"type", "bs"}, {"id", j + 1}, {"bias", est.bs_bias[j]}}.dump() << '\n';
    for (const PvaEstimate& p : est.confirmed)
        os << json{{"step", est.step},
                   {"type", "pva"},
                   {"key", p.key},
                   {"bs_index", p.bs_index},
                   {"position", vec(p.position)},
                   {"existence", p.existence}}
                  .dump()
           << '\n';
}

std::string manifest_json(const ManifestInfo& info) {
    json root{{"schema_version", kSchemaVersion},
              {"command", info.command},
              {"seed", info.seed},
              {"config_hash", hex64(fnv1a(info.scenario_yaml))},
              {"git_describe", git_describe()},
              {"threads", info.threads},
              {"files", info.files},
              {"config", info.scenario_yaml}};
    return root.dump(2) + "\n";
}

}  // namespace syncslam
