#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowlab/optimizer.hpp"
#include "flowlab/reparam.hpp"
#include "flowlab/velocity_net.hpp"

namespace flowlab {

// One named tensor in the checkpoint container.
struct ArrayRecord {
    std::string name;
    std::vector<std::uint64_t> shape;
    std::vector<double> data;
};

// Flat binary container: magic, version, then (name, shape header,
// little-endian float64 payload) per array.
void write_array_file(const std::string& path, const std::vector<ArrayRecord>& records);
std::vector<ArrayRecord> read_array_file(const std::string& path);

struct TrainCheckpoint {
    long step = 0;
    double loss_ema = 0.0;
    std::string rng_state;  // training stream
};

// Writes <path> (arrays: parameters + optimizer moments) and <path>.json
// (architecture and run state sidecar).
void save_checkpoint(const std::string& path, const VelocityNet& net,
                     const ReparamMaps& maps, const AdamWState& opt,
                     const TrainCheckpoint& state, const std::string& config_text);

struct LoadedCheckpoint {
    VelocityNet net;
    ReparamMaps maps;
    AdamWState opt;
    TrainCheckpoint state;
    std::string config_text;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace flowlab
