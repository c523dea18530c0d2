#include "flowlab/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "flowlab/config.hpp"
#include "flowlab/embedding.hpp"

namespace flowlab {

namespace {

constexpr char kMagic[8] = {'F', 'L', 'O', 'W', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

void put_f64(std::ostream& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_array_file(const std::string& path, const std::vector<ArrayRecord>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    put_u64(out, kVersion);
    put_u64(out, records.size());
    for (const ArrayRecord& r : records) {
        put_u64(out, r.name.size());
        out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
        put_u64(out, r.shape.size());
        std::uint64_t total = 1;
        for (std::uint64_t d : r.shape) {
            put_u64(out, d);
            total *= d;
        }
        if (total != r.data.size())
            throw ShapeError("checkpoint: shape does not match data for " + r.name);
        for (double d : r.data) put_f64(out, d);
    }
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::vector<ArrayRecord> read_array_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const std::uint64_t version = get_u64(in);
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version in " + path);
    const std::uint64_t count = get_u64(in);
    std::vector<ArrayRecord> records(count);
    for (ArrayRecord& r : records) {
        const std::uint64_t name_len = get_u64(in);
        r.name.resize(name_len);
        in.read(r.name.data(), static_cast<std::streamsize>(name_len));
        const std::uint64_t ndim = get_u64(in);
        r.shape.resize(ndim);
        std::uint64_t total = 1;
        for (std::uint64_t& d : r.shape) {
            d = get_u64(in);
            total *= d;
        }
        r.data.resize(total);
        for (double& d : r.data) d = get_f64(in);
        if (!in) throw std::runtime_error("checkpoint: truncated file " + path);
    }
    return records;
}

namespace {

ArrayRecord record_of(const std::string& name, const Mat& m) {
    ArrayRecord r;
    r.name = name;
    r.shape = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    r.data.assign(m.data(), m.data() + m.size());
    return r;
}

ArrayRecord record_of(const std::string& name, const Vec& v) {
    ArrayRecord r;
    r.name = name;
    r.shape = {static_cast<std::uint64_t>(v.size())};
    r.data.assign(v.data(), v.data() + v.size());
    return r;
}

ArrayRecord record_of(const std::string& name, const Arr& v) {
    ArrayRecord r;
    r.name = name;
    r.shape = {static_cast<std::uint64_t>(v.size())};
    r.data.assign(v.data(), v.data() + v.size());
    return r;
}

const ArrayRecord& find(const std::vector<ArrayRecord>& records, const std::string& name) {
    for (const ArrayRecord& r : records)
        if (r.name == name) return r;
    throw std::runtime_error("checkpoint: missing array '" + name + "'");
}

void restore(const std::vector<ArrayRecord>& records, const std::string& name, Mat& m) {
    const ArrayRecord& r = find(records, name);
    if (r.data.size() != static_cast<std::size_t>(m.size()))
        throw ShapeError("checkpoint: size mismatch for " + name);
    std::memcpy(m.data(), r.data.data(), r.data.size() * sizeof(double));
}

void restore(const std::vector<ArrayRecord>& records, const std::string& name, Vec& v) {
    const ArrayRecord& r = find(records, name);
    if (r.data.size() != static_cast<std::size_t>(v.size()))
        throw ShapeError("checkpoint: size mismatch for " + name);
    std::memcpy(v.data(), r.data.data(), r.data.size() * sizeof(double));
}

}  // namespace

void save_checkpoint(const std::string& path, const VelocityNet& net,
                     const ReparamMaps& maps, const AdamWState& opt,
                     const TrainCheckpoint& state, const std::string& config_text) {
    std::vector<ArrayRecord> records;
    const NetConfig& cfg = net.config();
    const char* embed_names[3] = {"embed_z", "embed_y", "embed_t"};
    for (int i = 0; i < 3; ++i) {
        records.push_back(record_of(std::string(embed_names[i]) + ".w", net.w_embed[i]));
        records.push_back(record_of(std::string(embed_names[i]) + ".b", net.b_embed[i]));
    }
    for (std::size_t l = 0; l < net.w_hidden.size(); ++l) {
        const std::string base = "hidden" + std::to_string(l + 1);
        records.push_back(record_of(base + ".w", net.w_hidden[l]));
        records.push_back(record_of(base + ".b", net.b_hidden[l]));
    }
    records.push_back(record_of("out.w", net.w_out));
    records.push_back(record_of("out.b", net.b_out));

    ReparamMaps& maps_mut = const_cast<ReparamMaps&>(maps);
    for (auto& [group, refs] : maps_mut.param_groups())
        for (const ParamRef& ref : refs) {
            ArrayRecord r;
            r.name = ref.name;
            r.shape = {static_cast<std::uint64_t>(ref.size)};
            r.data.assign(ref.data, ref.data + ref.size);
            records.push_back(std::move(r));
        }

    for (const auto& [name, arr] : opt.first_moment)
        records.push_back(record_of("adam.m." + name, arr));
    for (const auto& [name, arr] : opt.second_moment)
        records.push_back(record_of("adam.v." + name, arr));

    write_array_file(path, records);

    nlohmann::json sidecar;
    sidecar["format"] = "flowlab-checkpoint";
    sidecar["version"] = kVersion;
    sidecar["step"] = state.step;
    sidecar["loss_ema"] = state.loss_ema;
    sidecar["rng_state"] = state.rng_state;
    sidecar["adam_step_count"] = opt.step_count;
    sidecar["config"] = config_text;
    sidecar["network"] = {{"sin_dim", cfg.sin_dim},
                          {"embed_dim", cfg.embed_dim},
                          {"hidden", cfg.hidden},
                          {"freq_base", cfg.freq_base},
                          {"label_values", cfg.label_values}};
    std::ofstream js(path + ".json", std::ios::trunc);
    if (!js) throw std::runtime_error("checkpoint: cannot write sidecar for " + path);
    js << sidecar.dump(2) << "\n";
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream js(path + ".json");
    if (!js) throw std::runtime_error("checkpoint: missing sidecar " + path + ".json");
    nlohmann::json sidecar = nlohmann::json::parse(js);

    LoadedCheckpoint out;
    out.config_text = sidecar.at("config").get<std::string>();
    const ExperimentConfig cfg = ExperimentConfig::parse(out.config_text);
    cfg.validate();

    out.net = VelocityNet::zeros(cfg.net);
    out.maps = ReparamMaps::init(variant_from_string(cfg.variant), cfg.net.embed_dim,
                                 static_cast<int>(cfg.net.label_values.size()),
                                 cfg.source_shift_conditional);

    const std::vector<ArrayRecord> records = read_array_file(path);
    const char* embed_names[3] = {"embed_z", "embed_y", "embed_t"};
    for (int i = 0; i < 3; ++i) {
        restore(records, std::string(embed_names[i]) + ".w", out.net.w_embed[i]);
        restore(records, std::string(embed_names[i]) + ".b", out.net.b_embed[i]);
    }
    for (std::size_t l = 0; l < out.net.w_hidden.size(); ++l) {
        const std::string base = "hidden" + std::to_string(l + 1);
        restore(records, base + ".w", out.net.w_hidden[l]);
        restore(records, base + ".b", out.net.b_hidden[l]);
    }
    restore(records, "out.w", out.net.w_out);
    restore(records, "out.b", out.net.b_out);

    for (auto& [group, refs] : out.maps.param_groups()) {
        for (const ParamRef& ref : refs) {
            const ArrayRecord& r = find(records, ref.name);
            if (r.data.size() != static_cast<std::size_t>(ref.size))
                throw ShapeError("checkpoint: size mismatch for " + ref.name);
            std::memcpy(ref.data, r.data.data(), r.data.size() * sizeof(double));
        }
    }

    // optimizer moments: rebuild in the canonical group order
    out.opt.step_count = sidecar.at("adam_step_count").get<long>();
    for (const ArrayRecord& r : records) {
        if (r.name.rfind("adam.m.", 0) == 0)
            out.opt.first_moment.add(r.name.substr(7),
                                     Eigen::Map<const Arr>(r.data.data(), r.data.size()));
        else if (r.name.rfind("adam.v.", 0) == 0)
            out.opt.second_moment.add(r.name.substr(7),
                                      Eigen::Map<const Arr>(r.data.data(), r.data.size()));
    }

    out.maps.set_class_embeddings(out.net.class_embeddings());

    out.state.step = sidecar.at("step").get<long>();
    // NaN serializes as JSON null (no loss seen yet, e.g. a zero-step run)
    const auto& ema = sidecar.at("loss_ema");
    out.state.loss_ema = ema.is_number() ? ema.get<double>()
                                         : std::numeric_limits<double>::quiet_NaN();
    out.state.rng_state = sidecar.at("rng_state").get<std::string>();
    return out;
}

}  // namespace flowlab
