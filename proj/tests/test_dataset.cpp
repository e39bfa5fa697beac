#include <fstream>

#include <gtest/gtest.h>
#include <zlib.h>

#include "modnet/dataset.hpp"
#include "modnet/error.hpp"
#include "test_support.hpp"

using namespace modnet;
namespace fs = std::filesystem;

namespace {

IdxImages synthetic_images(std::size_t count) {
    IdxImages img;
    img.count = count;
    img.rows = img.cols = kImageSide;
    img.pixels.resize(count * kPixelsPerImage);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>((i * 37 + 11) % 256);
    return img;
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void gzip_file(const fs::path& src, const fs::path& dst) {
    const auto bytes = read_bytes(src);
    gzFile gz = gzopen(dst.c_str(), "wb");
    ASSERT_NE(gz, nullptr);
    ASSERT_EQ(gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size())), static_cast<int>(bytes.size()));
    gzclose(gz);
}

void write_split(const fs::path& dir, const std::string& prefix, std::size_t count) {
    write_idx_images(dir / (prefix + "-images-idx3-ubyte"), synthetic_images(count));
    std::vector<std::uint8_t> labels(count);
    for (std::size_t i = 0; i < count; ++i) labels[i] = static_cast<std::uint8_t>(i % 10);
    write_idx_labels(dir / (prefix + "-labels-idx1-ubyte"), labels);
}

}  // namespace

TEST(Idx, ImageRoundTripIsExact) {
    const auto dir = testing_support::scratch_dir("idx_images");
    const auto img = synthetic_images(2);
    write_idx_images(dir / "img", img);
    const auto back = load_idx_images(dir / "img");
    EXPECT_EQ(back.count, 2u);
    EXPECT_EQ(back.rows, 28u);
    EXPECT_EQ(back.cols, 28u);
    EXPECT_EQ(back.pixels, img.pixels);
    // header bytes are big-endian
    const auto raw = read_bytes(dir / "img");
    EXPECT_EQ((std::vector<std::uint8_t>(raw.begin(), raw.begin() + 8)),
              (std::vector<std::uint8_t>{0, 0, 8, 3, 0, 0, 0, 2}));
}

TEST(Idx, LabelRoundTripIsExact) {
    const auto dir = testing_support::scratch_dir("idx_labels");
    const std::vector<std::uint8_t> labels = {7, 0, 9};
    write_idx_labels(dir / "lab", labels);
    EXPECT_EQ(load_idx_labels(dir / "lab"), labels);
}

TEST(Idx, WrongMagicIsRejected) {
    const auto dir = testing_support::scratch_dir("idx_magic");
    write_idx_labels(dir / "lab", {1, 2, 3});
    EXPECT_THROW(load_idx_images(dir / "lab"), Error);
    write_idx_images(dir / "img", synthetic_images(1));
    EXPECT_THROW(load_idx_labels(dir / "img"), Error);
}

TEST(Idx, TruncatedFileIsRejected) {
    const auto dir = testing_support::scratch_dir("idx_trunc");
    write_idx_images(dir / "img", synthetic_images(3));
    auto bytes = read_bytes(dir / "img");
    bytes.resize(bytes.size() - 100);
    write_bytes(dir / "img", bytes);
    try {
        load_idx_images(dir / "img");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Data);
    }
    write_bytes(dir / "short", {0, 0, 8});
    EXPECT_THROW(load_idx_images(dir / "short"), Error);
}

TEST(Idx, WrongImageShapeIsRejected) {
    const auto dir = testing_support::scratch_dir("idx_shape");
    IdxImages img;
    img.count = 1;
    img.rows = 10;
    img.cols = 10;
    img.pixels.assign(100, 0);
    write_idx_images(dir / "img", img);
    EXPECT_THROW(load_idx_images(dir / "img"), Error);
}

TEST(Idx, OutOfRangeLabelIsRejected) {
    const auto dir = testing_support::scratch_dir("idx_label17");
    write_idx_labels(dir / "lab", {1, 17, 3});
    try {
        load_idx_labels(dir / "lab");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("17"), std::string::npos) << e.what();
    }
}

TEST(Idx, GzipIsDetectedTransparently) {
    const auto dir = testing_support::scratch_dir("idx_gzip");
    const auto img = synthetic_images(4);
    write_idx_images(dir / "img", img);
    gzip_file(dir / "img", dir / "img.gz");
    EXPECT_EQ(load_idx_images(dir / "img.gz").pixels, img.pixels);
    write_idx_labels(dir / "lab", {4, 5});
    gzip_file(dir / "lab", dir / "lab.anyname");
    EXPECT_EQ(load_idx_labels(dir / "lab.anyname"), (std::vector<std::uint8_t>{4, 5}));
}

TEST(Dataset, MakeLabeledSetNormalizes) {
    auto img = synthetic_images(2);
    img.pixels[0] = 255;
    img.pixels[1] = 0;
    const auto set = make_labeled_set(img, {3, 8}, Split::Test);
    EXPECT_EQ(set.images.rows(), 2);
    EXPECT_EQ(set.images.cols(), 784);
    EXPECT_EQ(set.images(0, 0), 1.0);
    EXPECT_EQ(set.images(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(set.images(1, 5), img.pixels[784 + 5] / 255.0);
    EXPECT_GE(set.images.minCoeff(), 0.0);
    EXPECT_LE(set.images.maxCoeff(), 1.0);
    EXPECT_EQ(set.labels, (std::vector<int>{3, 8}));
    EXPECT_THROW(make_labeled_set(img, {3}, Split::Test), Error);
}

TEST(Dataset, EmptyDirectoryListsAllFourFiles) {
    const auto dir = testing_support::scratch_dir("empty_dataset");
    try {
        load_dataset(DatasetName::Mnist, dir);
        FAIL();
    } catch (const Error& e) {
        const std::string what = e.what();
        for (const char* name : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                                 "t10k-labels-idx1-ubyte"})
            EXPECT_NE(what.find(name), std::string::npos) << what;
    }
}

TEST(Dataset, CustomDatasetSkipsSizeCheckButNamedOnesEnforceIt) {
    const auto dir = testing_support::scratch_dir("custom_dataset");
    write_split(dir, "train", 20);
    write_split(dir, "t10k", 5);
    const auto data = load_dataset(DatasetName::Custom, dir);
    EXPECT_EQ(data.train.size(), 20u);
    EXPECT_EQ(data.test.size(), 5u);
    EXPECT_EQ(data.test.split, Split::Test);
    EXPECT_THROW(load_dataset(DatasetName::FashionMnist, dir), Error);
}

TEST(Dataset, NameParsing) {
    EXPECT_EQ(parse_dataset_name("mnist"), DatasetName::Mnist);
    EXPECT_EQ(parse_dataset_name("fashion_mnist"), DatasetName::FashionMnist);
    EXPECT_EQ(to_string(DatasetName::FashionMnist), "fashion_mnist");
    EXPECT_THROW(parse_dataset_name("cifar"), Error);
}

class RealDataset : public ::testing::TestWithParam<const char*> {};

TEST_P(RealDataset, SplitSizesAndRanges) {
    const auto dir = testing_support::data_dir() / GetParam();
    if (!fs::exists(dir)) GTEST_SKIP() << "dataset not present at " << dir;
    const auto data = load_dataset(parse_dataset_name(GetParam()), dir);
    EXPECT_EQ(data.train.size(), 60000u);
    EXPECT_EQ(data.test.size(), 10000u);
    EXPECT_EQ(data.train.images.rows(), 60000);
    EXPECT_EQ(data.train.images.cols(), 784);
    for (const auto* set : {&data.train, &data.test}) {
        EXPECT_GE(set->images.minCoeff(), 0.0);
        EXPECT_LE(set->images.maxCoeff(), 1.0);
        for (int y : set->labels) ASSERT_TRUE(y >= 0 && y <= 9);
    }
}

INSTANTIATE_TEST_SUITE_P(Named, RealDataset, ::testing::Values("mnist", "fashion_mnist"));

TEST(RealDataset, MnistHasAConstantZeroCornerPixel) {
    const auto dir = testing_support::data_dir() / "mnist";
    if (!fs::exists(dir)) GTEST_SKIP() << "dataset not present at " << dir;
    const auto test = load_split(dir, Split::Test);
    EXPECT_TRUE(test.images.col(0).isZero(0.0));
}
