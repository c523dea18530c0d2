#include "flowlab/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "flowlab/csv.hpp"
#include "flowlab/reparam.hpp"

namespace flowlab {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

double to_double(const std::string& s) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw std::domain_error("config: cannot parse number '" + s + "'");
    }
}

long to_long(const std::string& s) {
    try {
        return std::stol(s);
    } catch (const std::exception&) {
        throw std::domain_error("config: cannot parse integer '" + s + "'");
    }
}

std::vector<double> to_doubles(const std::string& s) {
    std::vector<double> out;
    for (const std::string& item : split(s, ','))
        if (!item.empty()) out.push_back(to_double(item));
    return out;
}

std::vector<int> to_ints(const std::string& s) {
    std::vector<int> out;
    for (const std::string& item : split(s, ','))
        if (!item.empty()) out.push_back(static_cast<int>(to_long(item)));
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    return out;
}

std::string join(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

}  // namespace

DataSpec ExperimentConfig::data_spec() const {
    if (class_means.size() != class_stds.size() || class_means.empty())
        throw std::domain_error("config: class_means/class_stds mismatch");
    DataSpec spec;
    spec.dim = 1;
    for (std::size_t c = 0; c < class_means.size(); ++c)
        spec.classes.push_back({{Vec::Constant(1, class_means[c]), class_stds[c]}});
    spec.label_values = net.label_values;
    spec.validate();
    return spec;
}

void ExperimentConfig::validate() const {
    variant_from_string(variant);
    net.validate();
    data_spec();
    if (batch_size < 1) throw std::domain_error("config: batch_size must be >= 1");
    if (total_steps < 0) throw std::domain_error("config: steps must be >= 0");
    if (eval_every < 1) throw std::domain_error("config: eval_every must be >= 1");
    if (eval_samples < 1) throw std::domain_error("config: eval_samples must be >= 1");
    if (schedule_name != "linear")
        throw std::domain_error("config: unknown schedule '" + schedule_name + "'");
    if (sampler_mode != "ode" && sampler_mode != "sde")
        throw std::domain_error("config: sampler mode must be ode or sde");
    if (net.label_values.size() != class_means.size())
        throw std::domain_error("config: label_values must match class count");
}

std::string ExperimentConfig::serialize() const {
    std::ostringstream ss;
    ss << "[run]\n";
    ss << "variant = " << variant << "\n";
    ss << "seed = " << seed << "\n";
    ss << "steps = " << total_steps << "\n";
    ss << "batch_size = " << batch_size << "\n";
    ss << "eval_every = " << eval_every << "\n";
    ss << "eval_samples = " << eval_samples << "\n";
    // out_dir is a runtime location, not an experiment parameter; it stays
    // out of the canonical form so the config hash is location-independent
    ss << "source_shift_conditional = " << (source_shift_conditional ? "true" : "false") << "\n";
    ss << "\n[schedule]\n";
    ss << "name = " << schedule_name << "\n";
    ss << "\n[network]\n";
    ss << "sin_dim = " << net.sin_dim << "\n";
    ss << "embed_dim = " << net.embed_dim << "\n";
    ss << "hidden = " << join(net.hidden) << "\n";
    ss << "freq_base = " << format_double(net.freq_base) << "\n";
    ss << "label_values = " << join(net.label_values) << "\n";
    ss << "\n[optimizer]\n";
    ss << "beta1 = " << format_double(adam.beta1) << "\n";
    ss << "beta2 = " << format_double(adam.beta2) << "\n";
    ss << "epsilon = " << format_double(adam.epsilon) << "\n";
    ss << "lr_backbone = " << format_double(lr_backbone) << "\n";
    ss << "lr_source_shift = " << format_double(lr_source_shift) << "\n";
    ss << "lr_target_shift = " << format_double(lr_target_shift) << "\n";
    ss << "lr_source_scale = " << format_double(lr_source_scale) << "\n";
    ss << "lr_target_scale = " << format_double(lr_target_scale) << "\n";
    ss << "weight_decay = " << format_double(weight_decay) << "\n";
    ss << "\n[data]\n";
    ss << "class_means = " << join(class_means) << "\n";
    ss << "class_stds = " << join(class_stds) << "\n";
    ss << "\n[sampler]\n";
    ss << "steps = " << sampler_steps << "\n";
    ss << "mode = " << sampler_mode << "\n";
    ss << "sigma = " << format_double(sampler_sigma) << "\n";
    ss << "t_max = " << format_double(sampler_t_max) << "\n";
    return ss.str();
}

namespace {

void assign(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "run.variant") cfg.variant = value;
    else if (key == "run.seed") cfg.seed = static_cast<std::uint64_t>(to_long(value));
    else if (key == "run.steps") cfg.total_steps = to_long(value);
    else if (key == "run.batch_size") cfg.batch_size = static_cast<int>(to_long(value));
    else if (key == "run.eval_every") cfg.eval_every = to_long(value);
    else if (key == "run.eval_samples") cfg.eval_samples = static_cast<int>(to_long(value));
    else if (key == "run.out_dir") cfg.out_dir = value;
    else if (key == "run.source_shift_conditional")
        cfg.source_shift_conditional = (value == "true" || value == "1");
    else if (key == "schedule.name") cfg.schedule_name = value;
    else if (key == "network.sin_dim") cfg.net.sin_dim = static_cast<int>(to_long(value));
    else if (key == "network.embed_dim") cfg.net.embed_dim = static_cast<int>(to_long(value));
    else if (key == "network.hidden") cfg.net.hidden = to_ints(value);
    else if (key == "network.freq_base") cfg.net.freq_base = to_double(value);
    else if (key == "network.label_values") cfg.net.label_values = to_doubles(value);
    else if (key == "optimizer.beta1") cfg.adam.beta1 = to_double(value);
    else if (key == "optimizer.beta2") cfg.adam.beta2 = to_double(value);
    else if (key == "optimizer.epsilon") cfg.adam.epsilon = to_double(value);
    else if (key == "optimizer.lr_backbone") cfg.lr_backbone = to_double(value);
    else if (key == "optimizer.lr_source_shift") cfg.lr_source_shift = to_double(value);
    else if (key == "optimizer.lr_target_shift") cfg.lr_target_shift = to_double(value);
    else if (key == "optimizer.lr_source_scale") cfg.lr_source_scale = to_double(value);
    else if (key == "optimizer.lr_target_scale") cfg.lr_target_scale = to_double(value);
    else if (key == "optimizer.weight_decay") cfg.weight_decay = to_double(value);
    else if (key == "data.class_means") cfg.class_means = to_doubles(value);
    else if (key == "data.class_stds") cfg.class_stds = to_doubles(value);
    else if (key == "sampler.steps") cfg.sampler_steps = static_cast<int>(to_long(value));
    else if (key == "sampler.mode") cfg.sampler_mode = value;
    else if (key == "sampler.sigma") cfg.sampler_sigma = to_double(value);
    else if (key == "sampler.t_max") cfg.sampler_t_max = to_double(value);
    else throw std::domain_error("config: unknown key '" + key + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream ss(text);
    std::string line, section;
    while (std::getline(ss, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::domain_error("config: malformed line '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        assign(cfg, section.empty() ? key : section + "." + key, value);
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void ExperimentConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::domain_error("config override must look like section.key=value");
    assign(*this, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::uint64_t ExperimentConfig::config_hash() const {
    const std::string text = serialize();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace flowlab
