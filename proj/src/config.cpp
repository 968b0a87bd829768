#include "dsc/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace dsc {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw config_error("config: bad numeric value '" + v + "' for key '" + key + "'");
    }
}

long long parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        long long i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return i;
    } catch (...) {
        throw config_error("config: bad integer value '" + v + "' for key '" + key + "'");
    }
}

CovarianceMatrix parse_matrix(const std::string& v, int k) {
    if (v.rfind("file:", 0) == 0) {
        CovarianceMatrix K = CovarianceMatrix::load(trim(v.substr(5)));
        if (K.dim() != k) throw config_error("config: K file dimension does not match k");
        return K;
    }
    std::vector<double> entries;
    const auto rows = split(v, ';');
    if (static_cast<int>(rows.size()) != k)
        throw config_error("config: K must have k = " + std::to_string(k) + " rows");
    for (const auto& row : rows) {
        const auto cols = split(row, ',');
        if (static_cast<int>(cols.size()) != k)
            throw config_error("config: K row '" + row + "' must have k entries");
        for (const auto& c : cols) entries.push_back(parse_double(c, "K"));
    }
    try {
        return CovarianceMatrix(k, std::move(entries));
    } catch (const std::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
}

}  // namespace

SourceSpec ExperimentConfig::source_spec() const {
    return SourceSpec{family, K, seed, two_point_p};
}

SourceSpec ExperimentConfig::gaussian_reference_spec() const {
    return SourceSpec{Family::gaussian, K, seed, two_point_p};
}

ExperimentConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) +
                               ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("config line " + std::to_string(lineno) + ": empty key or value");
        if (kv.count(key))
            throw config_error("config: duplicate key '" + key + "'");
        kv[key] = value;
    }

    ExperimentConfig cfg;
    auto take = [&](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return {};
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("k"); !v.empty()) cfg.k = static_cast<int>(parse_int(v, "k"));
    if (cfg.k < 1) throw config_error("config: k must be >= 1");
    if (auto v = take("n"); !v.empty()) cfg.n = static_cast<int>(parse_int(v, "n"));
    if (cfg.n < 1) throw config_error("config: n must be >= 1");

    if (auto v = take("rates"); !v.empty()) {
        for (const auto& r : split(v, ',')) {
            const long long bits = parse_int(r, "rates");
            if (bits < 1) throw config_error("config: rates must be >= 1 bit");
            cfg.rates.push_back(static_cast<int>(bits));
        }
    }
    if (cfg.rates.empty()) cfg.rates.assign(static_cast<std::size_t>(cfg.k), 1);
    if (static_cast<int>(cfg.rates.size()) != cfg.k)
        throw config_error("config: need one rate per encoder");

    if (auto v = take("family"); !v.empty()) {
        try {
            cfg.family = family_from_string(v);
        } catch (const std::exception& e) {
            throw config_error(std::string("config: ") + e.what());
        }
    }

    if (auto v = take("K"); !v.empty())
        cfg.K = parse_matrix(v, cfg.k);
    else
        cfg.K = CovarianceMatrix::identity(cfg.k);

    if (auto v = take("b_list"); !v.empty()) {
        cfg.b_list.clear();
        for (const auto& b : split(v, ','))
            cfg.b_list.push_back(static_cast<int>(parse_int(b, "b_list")));
    }
    if (cfg.b_list.empty()) throw config_error("config: b_list must not be empty");
    for (std::size_t i = 0; i < cfg.b_list.size(); ++i) {
        const int b = cfg.b_list[i];
        if (b != 1 && (b < 2 || b % 2 != 0))
            throw config_error("config: b_list entry " + std::to_string(b) +
                               " is invalid (must be 1 or even)");
        if (b > 4096) throw config_error("config: b_list entry " + std::to_string(b) + " exceeds 4096");
        if (i > 0 && b <= cfg.b_list[i - 1])
            throw config_error("config: b_list must be strictly ascending");
    }

    if (auto v = take("trials"); !v.empty()) cfg.trials = static_cast<int>(parse_int(v, "trials"));
    if (cfg.trials < 100) throw config_error("config: trials must be >= 100");
    if (auto v = take("seed"); !v.empty())
        cfg.seed = static_cast<std::uint64_t>(parse_int(v, "seed"));
    if (auto v = take("delta"); !v.empty()) cfg.delta = parse_double(v, "delta");
    if (cfg.delta < 0.0 || cfg.delta >= 1.0) throw config_error("config: delta must be in [0,1)");
    if (auto v = take("epsilon"); !v.empty()) cfg.epsilon = parse_double(v, "epsilon");
    if (!(cfg.epsilon > 0.0)) throw config_error("config: epsilon must be positive");
    if (auto v = take("epsilon_prime"); !v.empty())
        cfg.epsilon_prime = parse_double(v, "epsilon_prime");
    if (!(cfg.epsilon_prime > 0.0)) throw config_error("config: epsilon_prime must be positive");
    if (auto v = take("two_point_p"); !v.empty()) cfg.two_point_p = parse_double(v, "two_point_p");
    if (!(cfg.two_point_p > 0.0 && cfg.two_point_p < 1.0))
        throw config_error("config: two_point_p must be in (0,1)");
    if (auto v = take("out"); !v.empty()) cfg.out_dir = v;
    if (auto v = take("decoder"); !v.empty()) {
        if (v != "lmmse" && v != "product")
            throw config_error("config: decoder must be 'lmmse' or 'product'");
        cfg.decoder = v;
    }
    if (auto v = take("ks_samples"); !v.empty()) cfg.ks_samples = parse_int(v, "ks_samples");
    if (cfg.ks_samples < 1000) throw config_error("config: ks_samples must be >= 1000");
    if (auto v = take("rect_resolution"); !v.empty())
        cfg.rect_resolution = static_cast<int>(parse_int(v, "rect_resolution"));

    if (!kv.empty()) throw config_error("config: unknown key '" + kv.begin()->first + "'");
    if (cfg.n * *std::max_element(cfg.rates.begin(), cfg.rates.end()) > 62)
        throw config_error("config: n*rate exceeds 62 bits");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace dsc
