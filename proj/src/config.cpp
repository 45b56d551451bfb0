#include "mia/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace mia {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        else if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

std::string canon_value(const std::string& raw, const std::string& where) {
    const std::string v = trim(raw);
    if (v.empty()) throw ValidationError(where + ": empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ValidationError(where + ": unterminated string");
        return v;
    }
    if (v.front() == '[') {
        if (v.back() != ']') throw ValidationError(where + ": unterminated array");
        std::string out = "[";
        std::string item;
        bool first = true;
        std::istringstream ss(v.substr(1, v.size() - 2));
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            if (!first) out += ",";
            out += canon_value(item, where);
            first = false;
        }
        return out + "]";
    }
    if (v == "true" || v == "false") return v;
    try {
        std::size_t pos = 0;
        (void)std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
        throw ValidationError(where + ": cannot parse value '" + v + "'");
    }
    return v;
}

std::vector<std::string> split_list(const std::string& canon) {
    std::vector<std::string> items;
    if (canon.size() < 2 || canon.front() != '[')
        throw ValidationError("value is not an array: " + canon);
    std::istringstream ss(canon.substr(1, canon.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) items.push_back(item);
    return items;
}

std::string unquote(const std::string& v) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
        return v.substr(1, v.size() - 2);
    return v;
}

}  // namespace

ConfigMap ConfigMap::parse_string(const std::string& text, const std::string& origin) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']') throw ValidationError(where + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ValidationError(where + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ValidationError(where + ": empty key");
        if (section.empty())
            throw ValidationError(where + ": key outside of any [section]");
        map.values_[section + "." + key] = canon_value(line.substr(eq + 1), where);
    }
    return map;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

void ConfigMap::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ValidationError("override must look like section.key=value: " + assignment);
    const std::string key = trim(assignment.substr(0, eq));
    if (key.find('.') == std::string::npos)
        throw ValidationError("override key must be section-qualified: " + assignment);
    values_[key] = canon_value(assignment.substr(eq + 1), "override " + key);
}

bool ConfigMap::has(const std::string& key) const { return values_.count(key) != 0; }

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : unquote(it->second);
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ValidationError("config key " + key + " is not a number: " + it->second);
    }
}

std::int64_t ConfigMap::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoll(it->second);
    } catch (const std::exception&) {
        throw ValidationError("config key " + key + " is not an integer: " + it->second);
    }
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw ValidationError("config key " + key + " is not a boolean: " + it->second);
}

std::vector<double> ConfigMap::get_double_list(const std::string& key,
                                               const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(it->second)) out.push_back(std::stod(item));
    return out;
}

std::vector<std::string> ConfigMap::get_string_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::string> out;
    for (const auto& item : split_list(it->second)) out.push_back(unquote(item));
    return out;
}

std::string ConfigMap::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
    };
    for (const auto& [k, v] : values_) {
        mix(k);
        mix("=");
        mix(v);
        mix("\n");
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

RunConfig RunConfig::from_map(const ConfigMap& map) {
    RunConfig cfg;
    cfg.digest = map.digest();

    const std::uint64_t seed = static_cast<std::uint64_t>(map.get_int("run.seed", 0));
    cfg.benchmark = BenchmarkConfig::standard(seed);
    cfg.benchmark.synth.num_classes =
        static_cast<std::size_t>(map.get_int("synth.num_classes", 10));
    cfg.benchmark.synth.dim = static_cast<std::size_t>(map.get_int("synth.dim", 20));
    cfg.benchmark.synth.samples_per_class =
        static_cast<std::size_t>(map.get_int("synth.samples_per_class", 100));
    cfg.benchmark.synth.cluster_spread = map.get_double("synth.cluster_spread", 0.15);
    cfg.benchmark.synth.label_noise = map.get_double("synth.label_noise", 0.3);
    cfg.benchmark.synth.seed = static_cast<std::uint64_t>(map.get_int("synth.seed",
                                                                      static_cast<std::int64_t>(seed)));
    cfg.benchmark.synth.validate();

    cfg.benchmark.arch = architecture_from_string(map.get_string("model.arch", "mlp"));
    cfg.benchmark.epochs = static_cast<std::size_t>(map.get_int("model.epochs", 2000));
    cfg.benchmark.learning_rate = map.get_double("model.learning_rate", 1.0);
    cfg.benchmark.num_random_nonmembers =
        static_cast<std::size_t>(map.get_int("attack.num_random_nonmembers", 1000));

    cfg.attack.projection.kind =
        projection_kind_from_string(map.get_string("attack.projection", "top_k"));
    cfg.attack.projection.k = static_cast<std::size_t>(map.get_int("attack.projection_k", 3));
    cfg.attack.kernel.family =
        kernel_family_from_string(map.get_string("attack.kernel", "gaussian"));
    const double sigma = map.get_double("attack.sigma", 0.0);
    cfg.attack.use_median_sigma = sigma <= 0.0;
    if (sigma > 0.0) cfg.attack.kernel.sigma = sigma;
    cfg.attack.kernel.norm_exponent =
        static_cast<int>(map.get_int("attack.norm_exponent",
                                     cfg.attack.kernel.family == KernelFamily::Laplacian ? 1 : 2));
    cfg.attack.kernel.square_distance = map.get_bool("attack.square_distance", true);
    cfg.attack.batch_size = static_cast<std::size_t>(map.get_int("attack.batch_size", 0));
    const std::string mode = map.get_string("attack.mode", "batch");
    if (mode == "batch") cfg.attack.mode = AttackMode::Batch;
    else if (mode == "incremental") cfg.attack.mode = AttackMode::Incremental;
    else throw ValidationError("attack.mode must be batch or incremental");
    cfg.attack.variant = diff_variant_from_string(map.get_string("attack.variant", "diff-w/"));
    cfg.attack.move_tolerance = map.get_double("attack.move_tolerance", 0.0);
    cfg.attack.max_iterations =
        static_cast<std::size_t>(map.get_int("attack.max_iterations", 100));
    cfg.attack.separation.method =
        separation_method_from_string(map.get_string("attack.separation", "threshold"));
    cfg.attack.separation.threshold_count =
        static_cast<std::size_t>(map.get_int("attack.threshold_count", 0));
    cfg.attack.separation.rng_seed =
        static_cast<std::uint64_t>(map.get_int("attack.separation_seed",
                                               static_cast<std::int64_t>(seed)));
    cfg.attack.validate();

    cfg.one_class_nu = map.get_double("attack.nu", 0.1);
    cfg.top1_percentile = map.get_double("attack.percentile", 90.0);
    cfg.attacks = map.get_string_list("attack.attacks", {"diff-w/"});

    cfg.sweep.ratios = map.get_double_list("sweep.ratios", {1, 5, 10, 20});
    const auto counts = map.get_double_list("sweep.class_counts", {2, 5, 10});
    cfg.sweep.class_counts.clear();
    for (double c : counts) cfg.sweep.class_counts.push_back(static_cast<std::size_t>(c));
    const auto seeds = map.get_double_list("sweep.seeds", {0, 1, 2, 3, 4});
    cfg.sweep.seeds.clear();
    for (double s : seeds) cfg.sweep.seeds.push_back(static_cast<std::uint64_t>(s));
    cfg.sweep.validate();

    cfg.output_dir = map.get_string("output.dir", "out");
    return cfg;
}

}  // namespace mia
