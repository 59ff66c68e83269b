#include "aqm/scenario.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace aqm::cli {

const json* json_find(const json& doc, const std::string& dotted) {
    const json* cur = &doc;
    std::size_t pos = 0;
    while (pos <= dotted.size()) {
        std::size_t dot = dotted.find('.', pos);
        std::string key = dotted.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (!cur->is_object() || !cur->contains(key)) return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos) break;
        pos = dot + 1;
    }
    return cur;
}

void json_set(json& doc, const std::string& dotted, const json& value) {
    json* cur = &doc;
    std::size_t pos = 0;
    while (true) {
        std::size_t dot = dotted.find('.', pos);
        std::string key = dotted.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            return;
        }
        cur = &(*cur)[key];
        pos = dot + 1;
    }
}

std::uint64_t config_hash(const json& canonical) {
    std::string dump = canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Scenario parse_scenario(const json& doc) {
    if (!doc.is_object()) throw std::runtime_error("scenario: top level must be an object");
    Scenario s;
    if (!doc.contains("experiment") || !doc["experiment"].is_string())
        throw std::runtime_error("scenario.experiment: required string");
    s.experiment = doc["experiment"].get<std::string>();
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer())
            throw std::runtime_error("scenario.seed: must be an integer");
        s.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("output")) {
        if (!doc["output"].is_string()) throw std::runtime_error("scenario.output: must be a string");
        s.output = doc["output"].get<std::string>();
    }
    if (doc.contains("params")) {
        if (!doc["params"].is_object())
            throw std::runtime_error("scenario.params: must be an object");
        s.params = doc["params"];
    }
    if (doc.contains("sweep")) {
        if (!doc["sweep"].is_array()) throw std::runtime_error("scenario.sweep: must be an array");
        for (std::size_t i = 0; i < doc["sweep"].size(); ++i) {
            const auto& ax = doc["sweep"][i];
            std::string where = "scenario.sweep[" + std::to_string(i) + "]";
            if (!ax.is_object() || !ax.contains("path") || !ax["path"].is_string())
                throw std::runtime_error(where + ".path: required string");
            if (!ax.contains("grid") || !ax["grid"].is_array() || ax["grid"].empty())
                throw std::runtime_error(where + ".grid: required non-empty array");
            SweepAxis axis;
            axis.path = ax["path"].get<std::string>();
            for (const auto& v : ax["grid"]) axis.values.push_back(v);
            s.sweep.push_back(std::move(axis));
        }
    }
    return s;
}

namespace {

void append_number(std::string& out, double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

// physics-range checks over a resolved parameter document
void check_physics(const json& node, const std::string& path, std::vector<std::string>& out) {
    if (node.is_object()) {
        // polarization fraction closure wherever a probe-like object appears
        if (node.contains("pi_fraction") && node.contains("sigma_plus_fraction") &&
            node.contains("sigma_minus_fraction")) {
            double total = node["pi_fraction"].get<double>() +
                           node["sigma_plus_fraction"].get<double>() +
                           node["sigma_minus_fraction"].get<double>();
            if (std::abs(total - 1.0) > 1e-9) {
                std::string msg = path + ": polarization fractions sum to ";
                append_number(msg, total);
                msg += ", expected 1";
                out.push_back(msg);
            }
        }
        for (auto it = node.begin(); it != node.end(); ++it) {
            std::string sub = path.empty() ? it.key() : path + "." + it.key();
            const json& v = it.value();
            if (v.is_number()) {
                double d = v.get<double>();
                if (!std::isfinite(d)) out.push_back(sub + ": not finite");
                if (it.key() == "waist" && d <= 0) out.push_back(sub + ": waist must be positive");
                if (it.key() == "na" && (d <= 0 || d >= 1))
                    out.push_back(sub + ": NA must be in (0,1)");
                if (it.key() == "spacing" && d <= 0)
                    out.push_back(sub + ": spacing must be positive");
                if ((it.key().find("intensity") != std::string::npos ||
                     it.key().find("fraction") != std::string::npos) &&
                    d < 0)
                    out.push_back(sub + ": must be non-negative");
                if (it.key().find("fraction") != std::string::npos && d > 1)
                    out.push_back(sub + ": fraction above 1");
                if ((it.key() == "tau" || it.key().find("tau_") == 0) && d < 0)
                    out.push_back(sub + ": duration must be non-negative");
            } else {
                check_physics(v, sub, out);
            }
        }
    }
}

}  // namespace

// defined in experiments.cpp
const json& experiment_defaults(const std::string& name);
bool experiment_exists(const std::string& name);

std::vector<std::string> validate_scenario(const json& doc) {
    std::vector<std::string> out;
    Scenario s;
    try {
        s = parse_scenario(doc);
    } catch (const std::exception& e) {
        out.push_back(e.what());
        return out;
    }
    if (!experiment_exists(s.experiment)) {
        out.push_back("scenario.experiment: unknown experiment '" + s.experiment + "'");
        return out;
    }
    json resolved = experiment_defaults(s.experiment);

    // every override path must refer to an existing default
    std::vector<std::pair<std::string, const json*>> stack{{"", &s.params}};
    while (!stack.empty()) {
        auto [prefix, node] = stack.back();
        stack.pop_back();
        for (auto it = node->begin(); it != node->end(); ++it) {
            std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
            const json* dflt = json_find(resolved, path);
            if (!dflt) {
                out.push_back("scenario.params." + path + ": no such parameter");
                continue;
            }
            if (it.value().is_object() && dflt->is_object()) {
                stack.push_back({path, &it.value()});
            } else {
                json_set(resolved, path, it.value());
            }
        }
    }

    for (const auto& axis : s.sweep) {
        if (!json_find(resolved, axis.path))
            out.push_back("scenario.sweep: path '" + axis.path + "' does not exist");
        if (axis.values.empty()) out.push_back("scenario.sweep: empty grid for '" + axis.path + "'");
        for (const auto& v : axis.values)
            if (!v.is_number()) {
                out.push_back("scenario.sweep: non-numeric grid value for '" + axis.path + "'");
                break;
            }
    }

    check_physics(resolved, "", out);
    return out;
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        out += table.columns[c];
        out += c + 1 == table.columns.size() ? '\n' : ',';
    }
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            append_number(out, row[c]);
            out += c + 1 == row.size() ? '\n' : ',';
        }
    }
    return out;
}

}  // namespace aqm::cli
