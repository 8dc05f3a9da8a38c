#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "nvmflow/neuro/mnist.hpp"

using namespace nvmflow::neuro;

namespace {

const std::filesystem::path kData = NVMFLOW_DATA_DIR "/mnist";

Dataset tiny()
{
    Dataset d;
    d.rows = 2;
    d.cols = 3;
    d.pixels = {0, 1, 2, 3, 4, 5, 255, 254, 253, 252, 251, 250};
    d.labels = {7, 0};
    return d;
}

std::string error_of(std::span<const std::uint8_t> im, std::span<const std::uint8_t> lb)
{
    try {
        parse_idx(im, lb);
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST(Idx, EncodeParseRoundTrip)
{
    const auto d = tiny();
    const auto [im, lb] = encode_idx(d);
    EXPECT_EQ(im.size(), 16u + 12u);
    EXPECT_EQ(im[3], 0x03);
    EXPECT_EQ(lb[3], 0x01);
    const auto r = parse_idx(im, lb);
    EXPECT_EQ(r.rows, 2);
    EXPECT_EQ(r.cols, 3);
    EXPECT_EQ(r.pixels, d.pixels);
    EXPECT_EQ(r.labels, d.labels);
    EXPECT_EQ(r.image(1)[0], 255);
}

TEST(Idx, BadMagicReportsOffset)
{
    auto [im, lb] = encode_idx(tiny());
    im[3] = 0x01;
    const auto e = error_of(im, lb);
    EXPECT_NE(e.find("bad magic 0x00000801 at byte 0"), std::string::npos) << e;
    auto [im2, lb2] = encode_idx(tiny());
    lb2[2] = 0x09;
    EXPECT_NE(error_of(im2, lb2).find("labels: bad magic"), std::string::npos);
}

TEST(Idx, TruncationReportsOffset)
{
    auto [im, lb] = encode_idx(tiny());
    im.pop_back();
    const auto e = error_of(im, lb);
    EXPECT_NE(e.find("truncated at byte 27"), std::string::npos) << e;
    EXPECT_NE(e.find("needs 28"), std::string::npos) << e;
    auto [im2, lb2] = encode_idx(tiny());
    lb2.resize(6);
    EXPECT_NE(error_of(im2, lb2).find("labels: truncated at byte 6"), std::string::npos);
}

TEST(Idx, CountMismatch)
{
    auto [im, lb] = encode_idx(tiny());
    lb[7] = 3;
    lb.push_back(1);
    const auto e = error_of(im, lb);
    EXPECT_NE(e.find("count mismatch"), std::string::npos) << e;
    EXPECT_NE(e.find("says 2"), std::string::npos) << e;
}

TEST(Idx, LabelOutOfRange)
{
    auto [im, lb] = encode_idx(tiny());
    lb[9] = 10;
    EXPECT_NE(error_of(im, lb).find("at byte 9"), std::string::npos);
}

TEST(Idx, MissingFile)
{
    EXPECT_THROW(load_mnist_idx("/nonexistent/a", "/nonexistent/b"), DataError);
}

TEST(Idx, BundledDigits)
{
    const auto tr = load_mnist_idx(kData / "train-images-idx3-ubyte.gz", kData / "train-labels-idx1-ubyte.gz");
    const auto te = load_mnist_idx(kData / "t10k-images-idx3-ubyte.gz", kData / "t10k-labels-idx1-ubyte.gz");
    EXPECT_EQ(tr.size(), 8000u);
    EXPECT_EQ(te.size(), 2000u);
    for (const auto* d : {&tr, &te}) {
        EXPECT_EQ(d->rows, 28);
        EXPECT_EQ(d->cols, 28);
        EXPECT_EQ(d->pixels.size(), d->size() * 784);
        std::array<int, 10> seen{};
        for (auto l : d->labels) {
            ASSERT_LE(l, 9);
            ++seen[l];
        }
        for (int c : seen) EXPECT_GT(c, 0);
        EXPECT_EQ(*std::max_element(d->pixels.begin(), d->pixels.end()), 255);
        EXPECT_EQ(*std::min_element(d->pixels.begin(), d->pixels.end()), 0);
    }
}

TEST(Idx, RawAndGzipAgree)
{
    const auto gz = load_mnist_idx(kData / "t10k-images-idx3-ubyte.gz", kData / "t10k-labels-idx1-ubyte.gz");
    const auto [im, lb] = encode_idx(gz);
    const auto dir = std::filesystem::temp_directory_path();
    const auto pi = dir / "nvmflow-idx-images", pl = dir / "nvmflow-idx-labels";
    std::ofstream(pi, std::ios::binary).write(reinterpret_cast<const char*>(im.data()), im.size());
    std::ofstream(pl, std::ios::binary).write(reinterpret_cast<const char*>(lb.data()), lb.size());
    const auto raw = load_mnist_idx(pi, pl);
    std::filesystem::remove(pi);
    std::filesystem::remove(pl);
    EXPECT_EQ(raw.pixels, gz.pixels);
    EXPECT_EQ(raw.labels, gz.labels);
}

TEST(Idx, FullTrainingFilesWhenAvailable)
{
    const char* dir = std::getenv("NVMFLOW_MNIST_DIR");
    if (!dir) GTEST_SKIP() << "NVMFLOW_MNIST_DIR not set";
    const std::filesystem::path p = dir;
    auto pick = [&](const char* stem) {
        return std::filesystem::exists(p / stem) ? p / stem : p / (std::string(stem) + ".gz");
    };
    const auto d = load_mnist_idx(pick("train-images-idx3-ubyte"), pick("train-labels-idx1-ubyte"));
    EXPECT_EQ(d.size(), 60000u);
    EXPECT_EQ(d.pixels_per_image(), 784);
}
