#include "glyphsmith/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "glyphsmith/error.hpp"

namespace glyphsmith {

namespace {

constexpr const char* kMagic = "GLYPHSMITH-CKPT";

std::string number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void put_le64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double get_le64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

// Splits "key rest-of-line".
std::pair<std::string, std::string> split_line(const std::string& line) {
  const auto sp = line.find(' ');
  if (sp == std::string::npos) return {line, ""};
  return {line.substr(0, sp), line.substr(sp + 1)};
}

template <typename T>
T parse_value(const std::string& text, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError(std::string("checkpoint: bad ") + what + " '" + text + "'");
  }
  return v;
}

}  // namespace

std::string serialize_checkpoint(const CarModel& model, const CheckpointMeta& meta) {
  std::string out;
  out += std::string(kMagic) + "\n";
  out += "version " + std::to_string(kCheckpointVersion) + "\n";
  out += "layout " + meta.layout + "\n";
  out += "epoch " + std::to_string(meta.epoch) + "\n";
  out += "lr " + number(meta.lr) + "\n";
  out += "rng " + std::to_string(meta.rng_state) + "\n";
  out += "model " + model_config_json(model.config()) + "\n";
  out += "train " + (meta.train_config.empty() ? std::string("{}") : meta.train_config) + "\n";
  std::size_t count = 0;
  for (const auto& p : model.parameters()) {
    out += "tensor " + p.name;
    for (auto d : p.value.shape) out += " " + std::to_string(d);
    out += "\n";
    count += p.value.numel();
  }
  out += "payload " + std::to_string(count) + "\n";
  out.reserve(out.size() + count * 8);
  for (const auto& p : model.parameters()) {
    for (double v : p.value.data) put_le64(out, v);
  }
  return out;
}

LoadedCheckpoint parse_checkpoint(const std::string& bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const auto nl = bytes.find('\n', pos);
    if (nl == std::string::npos) throw FormatError("checkpoint: truncated header");
    std::string line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  if (bytes.compare(0, std::strlen(kMagic), kMagic) != 0 || next_line() != kMagic) {
    throw FormatError("checkpoint: bad magic");
  }
  CheckpointMeta meta;
  std::string model_json;
  struct Entry {
    std::string name;
    std::vector<std::size_t> shape;
  };
  std::vector<Entry> manifest;
  std::size_t payload = 0;
  bool have_version = false, have_payload = false;
  while (!have_payload) {
    const auto [key, rest] = split_line(next_line());
    if (key == "version") {
      const int v = parse_value<int>(rest, "version");
      if (v != kCheckpointVersion) {
        throw FormatError("checkpoint: version " + std::to_string(v) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
      }
      have_version = true;
    } else if (key == "layout") {
      meta.layout = rest;
    } else if (key == "epoch") {
      meta.epoch = parse_value<int>(rest, "epoch");
    } else if (key == "lr") {
      meta.lr = parse_value<double>(rest, "lr");
    } else if (key == "rng") {
      meta.rng_state = parse_value<std::uint64_t>(rest, "rng state");
    } else if (key == "model") {
      model_json = rest;
    } else if (key == "train") {
      meta.train_config = rest;
    } else if (key == "tensor") {
      std::istringstream is(rest);
      Entry e;
      is >> e.name;
      std::string dim;
      while (is >> dim) e.shape.push_back(parse_value<std::size_t>(dim, "tensor extent"));
      if (e.name.empty()) throw FormatError("checkpoint: unnamed tensor");
      manifest.push_back(std::move(e));
    } else if (key == "payload") {
      payload = parse_value<std::size_t>(rest, "payload count");
      have_payload = true;
    } else {
      throw FormatError("checkpoint: unknown header field '" + key + "'");
    }
  }
  if (!have_version) throw FormatError("checkpoint: missing version");
  if (model_json.empty()) throw FormatError("checkpoint: missing model configuration");

  ModelConfig config = parse_model_config_json(model_json);
  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
  LoadedCheckpoint out{CarModel(config, 0), meta};
  auto& params = out.model.parameters();
  if (manifest.size() != params.size()) throw FormatError("checkpoint: tensor manifest does not match the model");
  std::size_t total = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (manifest[i].name != params[i].name || manifest[i].shape != params[i].value.shape) {
      throw FormatError("checkpoint: tensor '" + manifest[i].name + "' does not match model parameter '" +
                        params[i].name + "' " + params[i].value.shape_string());
    }
    total += params[i].value.numel();
  }
  if (total != payload) throw FormatError("checkpoint: payload count does not match the manifest");
  if (bytes.size() - pos < payload * 8) throw FormatError("checkpoint: truncated payload");
  if (bytes.size() - pos > payload * 8) throw FormatError("checkpoint: trailing bytes after payload");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (auto& param : params) {
    for (double& v : param.value.data) {
      v = get_le64(p);
      p += 8;
    }
  }
  return out;
}

void save_checkpoint(const CarModel& model, const CheckpointMeta& meta, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(model, meta);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return parse_checkpoint(os.str());
}

}  // namespace glyphsmith
