#include "facies/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "binary_io.hpp"
#include "facies/error.hpp"

namespace facies {
namespace {

constexpr std::uint32_t kPooledFlag = 1u;
constexpr std::uint32_t kLeakyDecoderFlag = 2u;
constexpr std::uint32_t kMaxExtent = 1u << 16;
const std::string kWhat = "checkpoint";

std::uint32_t read_extent(std::istream& is) {
  const std::uint32_t v = detail::read_u32(is, kWhat);
  if (v == 0 || v > kMaxExtent) throw FormatError("checkpoint: implausible extent " + std::to_string(v));
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& os, const CaeModel& model) {
  model.validate();
  os.write(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::write_u32(os, kCheckpointVersion);
  for (auto e : model.input_shape) detail::write_u32(os, static_cast<std::uint32_t>(e));
  detail::write_u32(os, model.unpool_mode == UnpoolMode::recorded ? 1u : 0u);
  detail::write_u32(os, static_cast<std::uint32_t>(model.layers.size()));
  for (const auto& layer : model.layers) {
    detail::write_u32(os, static_cast<std::uint32_t>(layer.in_channels()));
    detail::write_u32(os, static_cast<std::uint32_t>(layer.kernel_size()));
    detail::write_u32(os, static_cast<std::uint32_t>(layer.maps()));
    std::uint32_t flags = 0;
    if (layer.pooled) flags |= kPooledFlag;
    if (layer.decoder_activation == DecoderActivation::leaky) flags |= kLeakyDecoderFlag;
    detail::write_u32(os, flags);
    detail::write_f64(os, layer.slope);
  }
  for (const auto& layer : model.layers) {
    for (double v : layer.filters.data()) detail::write_f64(os, v);
    for (double v : layer.encoder_bias) detail::write_f64(os, v);
    for (double v : layer.decoder_bias) detail::write_f64(os, v);
  }
  if (!os) throw FormatError("checkpoint: write failed");
}

CaeModel read_checkpoint(std::istream& is) {
  char magic[8];
  detail::read_exact(is, magic, sizeof magic, kWhat);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(kCheckpointMagic)))
    throw FormatError("checkpoint: bad magic (not a model checkpoint)");
  const std::uint32_t version = detail::read_u32(is, kWhat);
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));

  CaeModel model;
  for (auto& e : model.input_shape) e = read_extent(is);
  const std::uint32_t mode = detail::read_u32(is, kWhat);
  if (mode > 1) throw FormatError("checkpoint: bad unpool mode");
  model.unpool_mode = mode == 1 ? UnpoolMode::recorded : UnpoolMode::random;
  const std::uint32_t count = detail::read_u32(is, kWhat);
  if (count == 0 || count > 64) throw FormatError("checkpoint: implausible layer count");

  for (std::uint32_t l = 0; l < count; ++l) {
    const std::uint32_t c = read_extent(is), n = read_extent(is), k = read_extent(is);
    const std::uint32_t flags = detail::read_u32(is, kWhat);
    if (flags > (kPooledFlag | kLeakyDecoderFlag)) throw FormatError("checkpoint: unknown layer flags");
    CaeLayer layer;
    layer.filters = Tensor({c, n, n, k});
    layer.encoder_bias.resize(k);
    layer.decoder_bias.resize(c);
    layer.pooled = (flags & kPooledFlag) != 0;
    layer.decoder_activation =
        (flags & kLeakyDecoderFlag) != 0 ? DecoderActivation::leaky : DecoderActivation::identity;
    layer.slope = detail::read_f64(is, kWhat);
    model.layers.push_back(std::move(layer));
  }
  auto read_values = [&](std::span<double> dst) {
    for (auto& v : dst) {
      v = detail::read_f64(is, kWhat);
      if (!std::isfinite(v)) throw FormatError("checkpoint: non-finite parameter");
    }
  };
  for (auto& layer : model.layers) {
    read_values(layer.filters.data());
    read_values(layer.encoder_bias);
    read_values(layer.decoder_bias);
  }
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("checkpoint: trailing bytes");
  try {
    model.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("checkpoint: inconsistent architecture: ") + e.what());
  }
  return model;
}

void save_checkpoint(const std::filesystem::path& path, const CaeModel& model) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot open " + path.string() + " for writing");
  write_checkpoint(os, model);
}

CaeModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open " + path.string());
  return read_checkpoint(is);
}

}  // namespace facies
