#include "aof/model_io.hpp"

#include "aof/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace aof {

namespace {

constexpr char kMagic[] = "AOFMODEL1";
constexpr std::size_t kMagicLen = sizeof(kMagic) - 1;
constexpr std::size_t kHeaderBytes = kMagicLen + 4 * sizeof(std::uint32_t);

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::uint64_t parameter_bytes(ModelDims d) {
  const std::uint64_t h1 = d.h1, h2 = d.h2, h3 = d.h3, c = d.classes;
  return sizeof(double) * (h1 * 3 + h1 + h2 * h1 + h2 + h3 * h2 + h3 + c * h3 + c);
}

}  // namespace

void save_model(const Classifier& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, kMagicLen);
  const ModelDims d = model.dims();
  for (int v : {d.h1, d.h2, d.h3, d.classes}) {
    const auto u = static_cast<std::uint32_t>(v);
    out.write(reinterpret_cast<const char*>(&u), sizeof(u));
  }
  for (const auto& layer : model.layers()) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        const double w = layer.weight(r, c);
        out.write(reinterpret_cast<const char*>(&w), sizeof(w));
      }
    }
    out.write(reinterpret_cast<const char*>(layer.bias.data()),
              static_cast<std::streamsize>(sizeof(double) * layer.bias.size()));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Classifier load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < kMagicLen || std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
    throw IoError("bad model magic in " + path.string());
  }
  if (bytes.size() < kHeaderBytes) {
    throw IoError("truncated model header in " + path.string() + ": expected " + std::to_string(kHeaderBytes) +
                  " bytes, got " + std::to_string(bytes.size()));
  }
  std::uint32_t dims[4];
  std::memcpy(dims, bytes.data() + kMagicLen, sizeof(dims));
  for (auto v : dims) {
    if (v == 0 || v > (1u << 16)) throw IoError("implausible model dimension in " + path.string());
  }
  const ModelDims d{static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]),
                    static_cast<int>(dims[3])};
  const std::uint64_t expected = kHeaderBytes + parameter_bytes(d);
  if (bytes.size() != expected) {
    throw IoError("model file " + path.string() + " has wrong size: expected " + std::to_string(expected) +
                  " bytes, got " + std::to_string(bytes.size()));
  }

  Classifier model(d);
  const char* cursor = bytes.data() + kHeaderBytes;
  auto read = [&cursor] {
    double v;
    std::memcpy(&v, cursor, sizeof(v));
    cursor += sizeof(v);
    return v;
  };
  for (auto& layer : model.mutable_layers()) {
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = read();
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = read();
  }
  return model;
}

}  // namespace aof
