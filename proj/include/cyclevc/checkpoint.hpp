#ifndef CYCLEVC_CHECKPOINT_HPP
#define CYCLEVC_CHECKPOINT_HPP

#include <filesystem>
#include <vector>

#include "cyclevc/model.hpp"

namespace cyclevc {

// Checkpoint layout: UTF-8 "key=value" header lines (architecture, then
// both normalization stats) terminated by an empty line, followed by every
// parameter tensor as little-endian float32 -- theta first, then phi, each in
// Network::tensors() order, each tensor column-major.
std::vector<unsigned char> encode_model(const CycleVCModel<float>& model);
CycleVCModel<float> decode_model(const std::vector<unsigned char>& bytes);

void save_model(const CycleVCModel<float>& model, const std::filesystem::path& path);
CycleVCModel<float> load_model(const std::filesystem::path& path);

} // namespace cyclevc

#endif
