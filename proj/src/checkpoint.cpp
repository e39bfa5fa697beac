#include "modnet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "modnet/error.hpp"

namespace modnet {

namespace {

constexpr char kMagic[4] = {'M', 'L', 'P', 'C'};

class Writer {
public:
    void u32(std::uint32_t v) {
        for (int s = 0; s < 32; s += 8) bytes.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void f64(double d) {
        const auto v = std::bit_cast<std::uint64_t>(d);
        for (int s = 0; s < 64; s += 8) bytes.push_back(static_cast<std::uint8_t>(v >> s));
    }
    std::vector<std::uint8_t> bytes;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
        return std::bit_cast<double>(v);
    }
    void magic() {
        need(4);
        if (std::memcmp(bytes_.data(), kMagic, 4) != 0) throw data_error("corrupt checkpoint: bad magic bytes");
        pos_ += 4;
    }
    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw data_error("corrupt checkpoint: truncated at byte " + std::to_string(pos_));
    }
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const MlpModel& model) {
    Writer w;
    w.bytes.insert(w.bytes.end(), kMagic, kMagic + 4);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(model.arch.layer_widths.size()));
    for (auto width : model.arch.layer_widths) w.u32(static_cast<std::uint32_t>(width));
    w.u32(model.arch.activation == Activation::ReLU ? 0 : 1);
    w.f64(model.arch.dropout_rate);
    for (std::size_t t = 0; t < model.weights.size(); ++t) {
        const auto& wt = model.weights[t];
        for (Eigen::Index i = 0; i < wt.rows(); ++i) {
            for (Eigen::Index j = 0; j < wt.cols(); ++j) w.f64(wt(i, j));
        }
        for (Eigen::Index i = 0; i < model.biases[t].size(); ++i) w.f64(model.biases[t](i));
    }
    return std::move(w.bytes);
}

MlpModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    r.magic();
    const auto version = r.u32();
    if (version != kCheckpointVersion) {
        throw data_error("corrupt checkpoint: format version " + std::to_string(version) + ", expected " +
                         std::to_string(kCheckpointVersion));
    }
    const auto layers = r.u32();
    if (layers < 2 || layers > 1024) throw data_error("corrupt checkpoint: layer count " + std::to_string(layers));
    MlpArchitecture arch;
    for (std::uint32_t t = 0; t < layers; ++t) arch.layer_widths.push_back(r.u32());
    const auto tag = r.u32();
    if (tag > 1) throw data_error("corrupt checkpoint: activation tag " + std::to_string(tag));
    arch.activation = tag == 0 ? Activation::ReLU : Activation::Sigmoid;
    arch.dropout_rate = r.f64();
    try {
        arch.validate();
    } catch (const Error& e) {
        throw data_error(std::string("corrupt checkpoint: ") + e.what());
    }

    // guard against absurd widths before allocating
    std::uint64_t expected = 0;
    for (std::size_t t = 0; t + 1 < arch.layer_widths.size(); ++t) {
        expected += (std::uint64_t{arch.layer_widths[t]} + 1) * arch.layer_widths[t + 1] * 8;
    }
    if (expected > bytes.size()) throw data_error("corrupt checkpoint: truncated parameter block");

    MlpModel model = MlpModel::zeros(arch);
    for (std::size_t t = 0; t < model.weights.size(); ++t) {
        auto& wt = model.weights[t];
        for (Eigen::Index i = 0; i < wt.rows(); ++i) {
            for (Eigen::Index j = 0; j < wt.cols(); ++j) wt(i, j) = r.f64();
        }
        for (Eigen::Index i = 0; i < model.biases[t].size(); ++i) model.biases[t](i) = r.f64();
    }
    if (!r.at_end()) throw data_error("corrupt checkpoint: trailing bytes after the parameter block");
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const MlpModel& model) {
    const auto bytes = serialize_model(model);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot write checkpoint " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw data_error("short write to checkpoint " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open checkpoint " + path.string());
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    try {
        return deserialize_model(bytes);
    } catch (const Error& e) {
        throw data_error(path.string() + ": " + e.what());
    }
}

}  // namespace modnet
