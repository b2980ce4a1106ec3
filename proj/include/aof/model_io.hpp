#pragma once

#include "aof/classifier.hpp"

#include <filesystem>

namespace aof {

/// Binary model file: "AOFMODEL1", dims (h1, h2, h3, classes) as u32, then
/// each layer's weight (row-major, out x in) followed by its bias, as f64.
/// All integers and floats little-endian.
void save_model(const Classifier& model, const std::filesystem::path& path);
Classifier load_model(const std::filesystem::path& path);

}  // namespace aof
