#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace modnet {

/// One example per row; row-major so that minibatch gathers are contiguous.
using ImageMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;  // 2049
inline constexpr std::size_t kImageSide = 28;
inline constexpr std::size_t kPixelsPerImage = kImageSide * kImageSide;
inline constexpr std::size_t kClassCount = 10;

/// Raw contents of an IDX image file: count images of rows x cols bytes, row-major.
struct IdxImages {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;
};

enum class Split { Train, Test };

struct LabeledImageSet {
    ImageMatrix images;       // m x 784, values in [0, 1]
    std::vector<int> labels;  // m entries in 0..9
    Split split = Split::Train;

    std::size_t size() const { return labels.size(); }
};

struct DatasetSplits {
    LabeledImageSet train;
    LabeledImageSet test;
};

/// Supported datasets. `Custom` reads the same four files without enforcing
/// the 60000 / 10000 split sizes (synthetic fixtures, truncated smoke sets).
enum class DatasetName { Mnist, FashionMnist, Custom };

std::string_view to_string(DatasetName name);
DatasetName parse_dataset_name(std::string_view text);

/// Reads an IDX3 image file (optionally gzip-compressed, detected by magic bytes).
/// Requires the 28x28 image shape.
IdxImages load_idx_images(const std::filesystem::path& path);

/// Reads an IDX1 label file (optionally gzip-compressed). Labels must be in 0..9.
std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path);

void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

/// Pixels scaled by 1/255 into an m x 784 matrix.
LabeledImageSet make_labeled_set(const IdxImages& images, const std::vector<std::uint8_t>& labels, Split split);

/// Loads one split from `dir`, looking for the standard file names
/// ({train,t10k}-{images-idx3,labels-idx1}-ubyte, optionally with a .gz suffix).
LabeledImageSet load_split(const std::filesystem::path& dir, Split split);

/// Loads both splits. For Mnist and FashionMnist the split sizes are checked.
/// Missing files are all listed in one Data error.
DatasetSplits load_dataset(DatasetName name, const std::filesystem::path& dir);

}  // namespace modnet
