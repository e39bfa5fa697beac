#include "modnet/dataset.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "modnet/error.hpp"

namespace modnet {

namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& compressed, const fs::path& path) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 32) != Z_OK) throw data_error("zlib init failed for " + path.string());
    zs.next_in = const_cast<Bytef*>(compressed.data());
    zs.avail_in = static_cast<uInt>(compressed.size());
    std::vector<std::uint8_t> out;
    std::array<std::uint8_t, 1 << 16> chunk{};
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw data_error("corrupt or truncated gzip stream in " + path.string());
        }
        out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
        if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw data_error("truncated gzip stream in " + path.string());
        }
    }
    inflateEnd(&zs);
    return out;
}

std::vector<std::uint8_t> read_maybe_gzipped(const fs::path& path) {
    auto bytes = read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes, path);
    return bytes;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t at) {
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
           std::uint32_t{b[at + 3]};
}

void put_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    b.push_back(static_cast<std::uint8_t>(v >> 24));
    b.push_back(static_cast<std::uint8_t>(v >> 16));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
    b.push_back(static_cast<std::uint8_t>(v));
}

std::string hex32(std::uint32_t v) {
    std::ostringstream os;
    os << "0x" << std::hex;
    os.width(8);
    os.fill('0');
    os << v;
    return os.str();
}

void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw data_error("short write to " + path.string());
}

struct SplitFiles {
    std::string images;
    std::string labels;
};

SplitFiles file_names(Split split) {
    const std::string prefix = split == Split::Train ? "train" : "t10k";
    return {prefix + "-images-idx3-ubyte", prefix + "-labels-idx1-ubyte"};
}

// Resolves `name` or `name.gz` inside dir; empty path when neither exists.
fs::path resolve(const fs::path& dir, const std::string& name) {
    if (fs::exists(dir / name)) return dir / name;
    if (fs::exists(dir / (name + ".gz"))) return dir / (name + ".gz");
    return {};
}

}  // namespace

std::string_view to_string(DatasetName name) {
    switch (name) {
        case DatasetName::Mnist: return "mnist";
        case DatasetName::FashionMnist: return "fashion_mnist";
        case DatasetName::Custom: return "custom";
    }
    return "custom";
}

DatasetName parse_dataset_name(std::string_view text) {
    if (text == "mnist") return DatasetName::Mnist;
    if (text == "fashion_mnist") return DatasetName::FashionMnist;
    if (text == "custom") return DatasetName::Custom;
    throw usage_error("unknown dataset '" + std::string(text) + "' (expected mnist, fashion_mnist or custom)");
}

IdxImages load_idx_images(const fs::path& path) {
    const auto bytes = read_maybe_gzipped(path);
    if (bytes.size() < 16) throw data_error(path.string() + ": truncated IDX image header");
    const auto magic = read_be32(bytes, 0);
    if (magic != kIdxImageMagic) {
        throw data_error(path.string() + ": wrong IDX magic " + hex32(magic) + ", expected " + hex32(kIdxImageMagic) +
                         " for images");
    }
    IdxImages out;
    out.count = read_be32(bytes, 4);
    out.rows = read_be32(bytes, 8);
    out.cols = read_be32(bytes, 12);
    if (out.rows != kImageSide || out.cols != kImageSide) {
        throw data_error(path.string() + ": image dimensions " + std::to_string(out.rows) + "x" +
                         std::to_string(out.cols) + ", expected 28x28");
    }
    const std::size_t expected = out.count * out.rows * out.cols;
    if (bytes.size() - 16 < expected) {
        throw data_error(path.string() + ": truncated, header declares " + std::to_string(out.count) +
                         " images but only " + std::to_string(bytes.size() - 16) + " pixel bytes follow");
    }
    out.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(expected));
    return out;
}

std::vector<std::uint8_t> load_idx_labels(const fs::path& path) {
    const auto bytes = read_maybe_gzipped(path);
    if (bytes.size() < 8) throw data_error(path.string() + ": truncated IDX label header");
    const auto magic = read_be32(bytes, 0);
    if (magic != kIdxLabelMagic) {
        throw data_error(path.string() + ": wrong IDX magic " + hex32(magic) + ", expected " + hex32(kIdxLabelMagic) +
                         " for labels");
    }
    const std::size_t count = read_be32(bytes, 4);
    if (bytes.size() - 8 < count) {
        throw data_error(path.string() + ": truncated, header declares " + std::to_string(count) + " labels but only " +
                         std::to_string(bytes.size() - 8) + " bytes follow");
    }
    std::vector<std::uint8_t> labels(bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(count));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= kClassCount) {
            throw data_error(path.string() + ": label " + std::to_string(labels[i]) + " at index " + std::to_string(i) +
                             " outside 0..9");
        }
    }
    return labels;
}

void write_idx_images(const fs::path& path, const IdxImages& images) {
    if (images.pixels.size() != images.count * images.rows * images.cols) {
        throw usage_error("IDX image buffer size does not match its dimensions");
    }
    std::vector<std::uint8_t> bytes;
    bytes.reserve(16 + images.pixels.size());
    put_be32(bytes, kIdxImageMagic);
    put_be32(bytes, static_cast<std::uint32_t>(images.count));
    put_be32(bytes, static_cast<std::uint32_t>(images.rows));
    put_be32(bytes, static_cast<std::uint32_t>(images.cols));
    bytes.insert(bytes.end(), images.pixels.begin(), images.pixels.end());
    write_file(path, bytes);
}

void write_idx_labels(const fs::path& path, const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(8 + labels.size());
    put_be32(bytes, kIdxLabelMagic);
    put_be32(bytes, static_cast<std::uint32_t>(labels.size()));
    bytes.insert(bytes.end(), labels.begin(), labels.end());
    write_file(path, bytes);
}

LabeledImageSet make_labeled_set(const IdxImages& images, const std::vector<std::uint8_t>& labels, Split split) {
    if (images.count != labels.size()) {
        throw data_error("image count " + std::to_string(images.count) + " does not match label count " +
                         std::to_string(labels.size()));
    }
    const std::size_t width = images.rows * images.cols;
    LabeledImageSet out;
    out.split = split;
    out.images.resize(static_cast<Eigen::Index>(images.count), static_cast<Eigen::Index>(width));
    double* dst = out.images.data();
    for (std::size_t i = 0; i < images.pixels.size(); ++i) dst[i] = images.pixels[i] / 255.0;
    out.labels.assign(labels.begin(), labels.end());
    return out;
}

LabeledImageSet load_split(const fs::path& dir, Split split) {
    const auto names = file_names(split);
    const auto images = resolve(dir, names.images);
    const auto labels = resolve(dir, names.labels);
    if (images.empty() || labels.empty()) {
        std::string missing;
        if (images.empty()) missing += " " + names.images;
        if (labels.empty()) missing += " " + names.labels;
        throw data_error("missing IDX files in " + dir.string() + ":" + missing);
    }
    return make_labeled_set(load_idx_images(images), load_idx_labels(labels), split);
}

DatasetSplits load_dataset(DatasetName name, const fs::path& dir) {
    std::vector<std::string> missing;
    for (auto split : {Split::Train, Split::Test}) {
        const auto names = file_names(split);
        for (const auto& f : {names.images, names.labels}) {
            if (resolve(dir, f).empty()) missing.push_back(f);
        }
    }
    if (!missing.empty()) {
        std::string msg = "dataset '" + std::string(to_string(name)) + "' is missing files in " + dir.string() + ":";
        for (const auto& f : missing) msg += " " + f + "[.gz]";
        throw data_error(msg);
    }
    DatasetSplits out{load_split(dir, Split::Train), load_split(dir, Split::Test)};
    if (name != DatasetName::Custom && (out.train.size() != 60000 || out.test.size() != 10000)) {
        throw data_error("dataset '" + std::string(to_string(name)) + "' has " + std::to_string(out.train.size()) +
                         " train / " + std::to_string(out.test.size()) + " test examples, expected 60000 / 10000");
    }
    return out;
}

}  // namespace modnet
