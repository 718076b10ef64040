#include "tiger/checkpoint.hpp"

#include "tiger/error.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace tiger {

namespace {

const char* kModule = "checkpoint";
constexpr std::array<char, 8> kMagic = {'T', 'I', 'G', 'E', 'R', 'C', 'K', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

void write_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::ifstream& in, const std::filesystem::path& path) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw IngestionError(kModule, path.string() + ": truncated header");
    }
    return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::vector<Tensor>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IngestionError(kModule, "cannot write " + path.string());
    out.write(kMagic.data(), kMagic.size());
    write_u64(out, tensors.size());
    for (const Tensor& t : tensors) {
        write_u64(out, t.rows());
        write_u64(out, t.cols());
        out.write(reinterpret_cast<const char*>(t.data().data()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
}

std::vector<Tensor> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestionError(kModule, "cannot open " + path.string());
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw IngestionError(kModule, path.string() + ": not a checkpoint file");
    }
    const std::uint64_t count = read_u64(in, path);
    std::vector<Tensor> tensors;
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint64_t rows = read_u64(in, path);
        const std::uint64_t cols = read_u64(in, path);
        Tensor t(rows, cols);
        if (!in.read(reinterpret_cast<char*>(t.data().data()),
                     static_cast<std::streamsize>(t.size() * sizeof(double)))) {
            throw IngestionError(kModule, path.string() + ": truncated tensor " + std::to_string(i));
        }
        tensors.push_back(std::move(t));
    }
    return tensors;
}

}  // namespace tiger
