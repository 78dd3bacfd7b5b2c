#include "fagci/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace fagci {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin.empty() ? "<string>" : origin;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments outside quotes
        bool quoted = false;
        std::string body;
        for (char c : line) {
            if (c == '"') quoted = !quoted;
            if (c == '#' && !quoted) break;
            body.push_back(c);
        }
        body = trim(body);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(cfg.origin_ + ":" + std::to_string(lineno) +
                              ": expected `key = value`");
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw ConfigError(cfg.origin_ + ":" + std::to_string(lineno) + ": empty key");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (cfg.values_.count(key))
            throw ConfigError(cfg.origin_ + ":" + std::to_string(lineno) + ": duplicate key `" +
                              key + "`");
        cfg.values_[key] = value;
    }
    return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
    if (values_.count(key)) {
        read_.insert(key);
        return true;
    }
    return false;
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(origin_ + ": missing key `" + key + "`");
    read_.insert(key);
    return it->second;
}

std::string KeyValueConfig::get_string_or(const std::string& key,
                                          const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t used = 0;
        double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key `" + key + "` is not a number: " + raw);
    }
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long KeyValueConfig::get_long(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t used = 0;
        long v = std::stol(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key `" + key + "` is not an integer: " + raw);
    }
}

long KeyValueConfig::get_long_or(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::string raw = get_string(key);
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        std::size_t comma = raw.find(',', pos);
        std::string item = trim(comma == std::string::npos ? raw.substr(pos)
                                                           : raw.substr(pos, comma - pos));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<double> KeyValueConfig::get_numbers(const std::string& key) const {
    std::string raw = get_string(key);
    std::replace(raw.begin(), raw.end(), ',', ' ');
    std::istringstream in(raw);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw ConfigError(origin_ + ": key `" + key + "` has non-numeric entries");
    return out;
}

std::vector<std::string> KeyValueConfig::unread_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
        if (!read_.count(k)) out.push_back(k);
    return out;
}

Constellation constellation_from_config(const KeyValueConfig& cfg, const std::string& prefix) {
    if (cfg.has(prefix + ".points")) {
        const std::vector<double> nums = cfg.get_numbers(prefix + ".points");
        if (nums.empty() || nums.size() % 2 != 0)
            throw ConfigError(prefix + ".points must hold re/im pairs");
        std::vector<cplx> pts;
        for (std::size_t k = 0; k < nums.size(); k += 2) pts.emplace_back(nums[k], nums[k + 1]);
        return Constellation::from_points(std::move(pts));
    }
    if (!cfg.has(prefix + ".kind")) return Constellation::zero();
    const std::string kind = cfg.get_string(prefix + ".kind");
    if (kind == "zero") return Constellation::zero();
    ConstellationKind ck;
    if (kind == "qam")
        ck = ConstellationKind::Qam;
    else if (kind == "psk")
        ck = ConstellationKind::Psk;
    else if (kind == "pam")
        ck = ConstellationKind::Pam;
    else
        throw ConfigError(prefix + ".kind must be qam|psk|pam|zero, got " + kind);
    const long order = cfg.get_long(prefix + ".order");
    const double power = db_to_linear(cfg.get_double_or(prefix + ".power_db", 0.0));
    try {
        return Constellation::standard(ck, static_cast<int>(order), power);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(prefix + ": " + e.what());
    }
}

DecodingMetric metric_from_name(const std::string& name, const Channel& chan) {
    if (name == "matched") return DecodingMetric::matched();
    if (name == "partial") return DecodingMetric::partial_gaussian();
    if (name == "full") return DecodingMetric::full_gaussian();
    if (name.rfind("ggauss:", 0) == 0) {
        double beta;
        try {
            beta = std::stod(name.substr(7));
        } catch (const std::exception&) {
            throw ConfigError("bad generalized-Gaussian shape in metric name: " + name);
        }
        if (!(beta > 0.0)) throw ConfigError("generalized-Gaussian shape must be positive");
        return DecodingMetric::generalized_gaussian(beta);
    }
    if (name.rfind("decomp:", 0) == 0) {
        int split;
        try {
            split = std::stoi(name.substr(7));
        } catch (const std::exception&) {
            throw ConfigError("bad split index in metric name: " + name);
        }
        try {
            return DecodingMetric::interference_decomposition(decompose_pam(chan.j, split));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("metric ") + name + ": " + e.what());
        }
    }
    throw ConfigError("unknown metric name: " + name);
}

}  // namespace fagci
