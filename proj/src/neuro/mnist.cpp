#include "nvmflow/neuro/mnist.hpp"

#include <zlib.h>

#include <algorithm>
#include <string>

namespace nvmflow::neuro {

namespace {

std::uint32_t be32(std::span<const std::uint8_t> b, size_t at)
{
    return (std::uint32_t(b[at]) << 24) | (std::uint32_t(b[at + 1]) << 16) | (std::uint32_t(b[at + 2]) << 8) |
           std::uint32_t(b[at + 3]);
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::string hex(std::uint32_t v)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "0x%08x", v);
    return buf;
}

void need(std::span<const std::uint8_t> b, size_t end, const char* what, const char* field)
{
    if (b.size() < end)
        throw DataError(std::string(what) + ": truncated at byte " + std::to_string(b.size()) + " while reading " +
                        field + " (needs " + std::to_string(end) + " bytes)");
}

std::vector<std::uint8_t> read_all(const std::filesystem::path& path)
{
    // gzread passes uncompressed files through unchanged
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw DataError(path.string() + ": cannot open");
    std::vector<std::uint8_t> out;
    std::uint8_t buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof buf)) > 0) out.insert(out.end(), buf, buf + n);
    int err = Z_OK;
    const char* msg = gzerror(f, &err);
    gzclose(f);
    if (n < 0 || (err != Z_OK && err != Z_BUF_ERROR))
        throw DataError(path.string() + ": read error after " + std::to_string(out.size()) + " bytes: " + msg);
    return out;
}

} // namespace

std::span<const std::uint8_t> Dataset::image(size_t i) const
{
    const size_t n = pixels_per_image();
    return {pixels.data() + i * n, n};
}

Dataset Dataset::head(size_t n) const
{
    Dataset d;
    d.rows = rows;
    d.cols = cols;
    n = std::min(n, size());
    d.labels.assign(labels.begin(), labels.begin() + n);
    d.pixels.assign(pixels.begin(), pixels.begin() + n * pixels_per_image());
    return d;
}

Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels)
{
    need(images, 4, "images", "magic");
    if (be32(images, 0) != 0x00000803)
        throw DataError("images: bad magic " + hex(be32(images, 0)) + " at byte 0 (expected 0x00000803)");
    need(images, 16, "images", "dimensions");
    need(labels, 4, "labels", "magic");
    if (be32(labels, 0) != 0x00000801)
        throw DataError("labels: bad magic " + hex(be32(labels, 0)) + " at byte 0 (expected 0x00000801)");
    need(labels, 8, "labels", "count");

    const size_t count = be32(images, 4);
    Dataset d;
    d.rows = static_cast<int>(be32(images, 8));
    d.cols = static_cast<int>(be32(images, 12));
    if (d.rows <= 0 || d.cols <= 0 || d.rows > 4096 || d.cols > 4096)
        throw DataError("images: implausible dimensions " + std::to_string(d.rows) + "x" + std::to_string(d.cols) +
                        " at byte 8");
    const size_t n_labels = be32(labels, 4);
    if (n_labels != count)
        throw DataError("count mismatch: images header (byte 4) says " + std::to_string(count) +
                        ", labels header (byte 4) says " + std::to_string(n_labels));
    const size_t per = size_t(d.rows) * d.cols;
    need(images, 16 + count * per, "images", "pixel data");
    need(labels, 8 + count, "labels", "label data");

    d.pixels.assign(images.begin() + 16, images.begin() + 16 + count * per);
    d.labels.assign(labels.begin() + 8, labels.begin() + 8 + count);
    for (size_t i = 0; i < count; ++i)
        if (d.labels[i] > 9)
            throw DataError("labels: value " + std::to_string(d.labels[i]) + " out of range 0..9 at byte " +
                            std::to_string(8 + i));
    return d;
}

Dataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels)
{
    const auto ib = read_all(images);
    const auto lb = read_all(labels);
    try {
        return parse_idx(ib, lb);
    } catch (const DataError& e) {
        throw DataError(images.filename().string() + " / " + labels.filename().string() + ": " + e.what());
    }
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> encode_idx(const Dataset& d)
{
    std::vector<std::uint8_t> im, lb;
    put32(im, 0x00000803);
    put32(im, static_cast<std::uint32_t>(d.size()));
    put32(im, d.rows);
    put32(im, d.cols);
    im.insert(im.end(), d.pixels.begin(), d.pixels.end());
    put32(lb, 0x00000801);
    put32(lb, static_cast<std::uint32_t>(d.size()));
    lb.insert(lb.end(), d.labels.begin(), d.labels.end());
    return {im, lb};
}

} // namespace nvmflow::neuro
