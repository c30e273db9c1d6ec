#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "model.hpp"
#include "training.hpp"

namespace joint3ee {

// Binary checkpoint:
//   "J3EECKPT" | u32 version | u64 header bytes | JSON header |
//   raw little-endian doubles of every parameter, in header order.
// The header carries the schema, vocabulary, feature inventories, model
// and training configuration, and each parameter's name and shape.
inline constexpr char kCheckpointMagic[8] = {'J', '3', 'E', 'E', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian doubles");

struct Checkpoint {
    JointModel model;
    TrainConfig train_config;
};

namespace detail {

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw ParseError("checkpoint: truncated file");
    return v;
}

}  // namespace detail

inline void write_checkpoint(std::ostream& out, const JointModel& model, const TrainConfig& train_config) {
    json header;
    header["schema"] = model.schema().to_json();
    header["vocabulary"] = model.vocabulary().to_json();
    header["features"] = model.features().to_json();
    header["model_config"] = model.config().to_json();
    header["train_config"] = train_config.to_json();
    header["parameters"] = json::array();
    const auto params = model.parameters();
    for (const auto& p : params) header["parameters"].push_back({{"name", p.name()}, {"shape", p.shape()}});
    const std::string text = header.dump();

    out.write(kCheckpointMagic, sizeof kCheckpointMagic);
    detail::write_pod(out, kCheckpointVersion);
    detail::write_pod(out, static_cast<std::uint64_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& p : params) {
        out.write(reinterpret_cast<const char*>(p.values().data()),
                  static_cast<std::streamsize>(p.size() * sizeof(double)));
    }
    if (!out) throw IoError("checkpoint: write failed");
}

inline void save_checkpoint(const std::string& path, const JointModel& model, const TrainConfig& train_config) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint '" + path + "'");
    write_checkpoint(out, model, train_config);
}

inline Checkpoint read_checkpoint(std::istream& in) {
    char magic[sizeof kCheckpointMagic];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
        throw ParseError("checkpoint: bad magic");
    }
    const auto version = detail::read_pod<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw ParseError("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto header_size = detail::read_pod<std::uint64_t>(in);
    std::string text(header_size, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(header_size))) {
        throw ParseError("checkpoint: truncated header");
    }
    json header;
    try {
        header = json::parse(text);
    } catch (const json::exception& ex) {
        throw ParseError(std::string("checkpoint: bad header: ") + ex.what());
    }
    Rng rng(0);
    Checkpoint ck{JointModel(LabelSchema::from_json(header.at("schema")),
                             Vocabulary::from_json(header.at("vocabulary")),
                             BinaryFeatureEncoder::from_json(header.at("features")),
                             ModelConfig::from_json(header.at("model_config")), rng),
                  TrainConfig::from_json(header.at("train_config"))};
    auto params = ck.model.parameters();
    const auto& listed = header.at("parameters");
    if (listed.size() != params.size()) throw ParseError("checkpoint: parameter count mismatch");
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (listed[k].at("name").get<std::string>() != params[k].name() ||
            listed[k].at("shape").get<Shape>() != params[k].shape()) {
            throw ParseError("checkpoint: parameter '" + params[k].name() + "' does not match the model");
        }
        auto dst = params[k].mutable_values();
        if (!in.read(reinterpret_cast<char*>(dst.data()), static_cast<std::streamsize>(dst.size() * sizeof(double)))) {
            throw ParseError("checkpoint: truncated parameter data");
        }
    }
    return ck;
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    return read_checkpoint(in);
}

}  // namespace joint3ee
