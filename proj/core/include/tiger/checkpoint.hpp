#pragma once

// Flat binary parameter checkpoints:
//
//   8 bytes   magic "TIGERCK1"
//   u64       tensor count
//   per tensor: u64 rows, u64 cols, rows*cols little-endian IEEE-754 doubles

#include "tiger/tensor.hpp"

#include <filesystem>
#include <vector>

namespace tiger {

void save_checkpoint(const std::filesystem::path& path, const std::vector<Tensor>& tensors);
std::vector<Tensor> load_checkpoint(const std::filesystem::path& path);

}  // namespace tiger
