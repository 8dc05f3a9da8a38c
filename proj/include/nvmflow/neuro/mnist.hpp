#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace nvmflow::neuro {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Dataset {
    int rows = 0, cols = 0;
    std::vector<std::uint8_t> pixels; // row-major, one image after another
    std::vector<std::uint8_t> labels;

    size_t size() const { return labels.size(); }
    int pixels_per_image() const { return rows * cols; }
    std::span<const std::uint8_t> image(size_t i) const;
    /// First n samples (or all when n >= size()).
    Dataset head(size_t n) const;
};

/// Parses in-memory IDX buffers: images magic 0x00000803 (count, rows, cols,
/// then unsigned bytes), labels magic 0x00000801 (count, then bytes in 0..9).
/// Errors name the file role and the byte offset.
Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels);

/// Reads both files (raw or gzip-compressed) and parses them.
Dataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// IDX encoding of a dataset, uncompressed; parse_idx(encode_idx(...)) is the identity.
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> encode_idx(const Dataset& d);

} // namespace nvmflow::neuro
