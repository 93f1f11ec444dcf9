#include "upw/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "upw/error.hpp"

namespace upw {
namespace {

constexpr char kMagic[8] = {'U', 'P', 'W', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint64_t kMaxConfigBytes = 1 << 20;
constexpr std::uint32_t kMaxNameBytes = 4096;

}  // namespace

void save_checkpoint(std::ostream& out, const Model& model) {
    detail::LeWriter w(out);
    w.bytes(kMagic, sizeof kMagic);
    const std::string config = model.config().to_key_values();
    w.u64(config.size());
    w.bytes(config.data(), config.size());
    w.u64(model.parameters().size());
    for (const Parameter& p : model.parameters()) {
        w.u32(static_cast<std::uint32_t>(p.name.size()));
        w.bytes(p.name.data(), p.name.size());
        w.u32(2);
        w.u64(p.value.rows);
        w.u64(p.value.cols);
        for (const double v : p.value.data) w.f64(v);
    }
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    save_checkpoint(out, model);
    if (!out) throw Error(ErrorKind::Io, "write failed: " + path.string());
}

std::vector<std::uint8_t> checkpoint_bytes(const Model& model) {
    std::ostringstream out(std::ios::binary);
    save_checkpoint(out, model);
    const std::string s = out.str();
    return {s.begin(), s.end()};
}

Model load_checkpoint(std::istream& in) {
    detail::LeReader r(in);
    char magic[8];
    r.bytes(magic, sizeof magic, "checkpoint magic");
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error(ErrorKind::Format, "not a UPWCKPT1 checkpoint");

    const std::uint64_t config_len = r.u64("config length");
    if (config_len > kMaxConfigBytes) throw Error(ErrorKind::Corruption, "checkpoint config block too large");
    std::string config_text(config_len, '\0');
    r.bytes(config_text.data(), config_text.size(), "config block");
    KeyValues kv = parse_key_values(config_text);
    const ModelConfig config = ModelConfig::take_from(kv);
    reject_unknown_keys(kv);

    Model model(config, 0);
    const std::uint64_t count = r.u64("parameter count");
    if (count != model.parameters().size()) {
        throw Error(ErrorKind::Corruption, "checkpoint holds " + std::to_string(count) + " parameters, config implies " +
                                               std::to_string(model.parameters().size()));
    }
    for (Parameter& p : model.parameters()) {
        const std::uint32_t name_len = r.u32("parameter name length");
        if (name_len > kMaxNameBytes) throw Error(ErrorKind::Corruption, "parameter name too long");
        std::string name(name_len, '\0');
        r.bytes(name.data(), name.size(), "parameter name");
        if (name != p.name) throw Error(ErrorKind::Corruption, "expected parameter '" + p.name + "', found '" + name + "'");
        const std::uint32_t rank = r.u32("parameter rank");
        if (rank != 2) throw Error(ErrorKind::Corruption, "parameter '" + name + "' has rank " + std::to_string(rank));
        const std::uint64_t rows = r.u64("parameter shape");
        const std::uint64_t cols = r.u64("parameter shape");
        if (rows != p.value.rows || cols != p.value.cols) {
            throw Error(ErrorKind::Corruption, "parameter '" + name + "' has unexpected shape");
        }
        for (double& v : p.value.data) v = r.f64("parameter values");
    }
    if (!r.at_end()) throw Error(ErrorKind::Corruption, "trailing bytes after checkpoint");
    return model;
}

Model load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return load_checkpoint(in);
}

Model load_checkpoint(std::span<const std::uint8_t> bytes) {
    detail::SpanBuf buf(bytes);
    std::istream in(&buf);
    return load_checkpoint(in);
}

}  // namespace upw
