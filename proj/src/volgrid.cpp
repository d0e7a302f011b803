#include "msairway/volgrid.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace msairway {

namespace fs = std::filesystem;

void WindowSpec::validate() const {
  if (!(width_hu > 0.0) || !std::isfinite(width_hu)) {
    throw RangeError("window width must be positive, got " + std::to_string(width_hu));
  }
  if (!std::isfinite(level_hu)) throw RangeError("window level must be finite");
}

void ScaleSpec::validate() const {
  if (ratios.empty()) throw RangeError("at least one interpolation ratio is required");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i] < 1) throw RangeError("interpolation ratios must be >= 1");
    if (i > 0 && ratios[i] <= ratios[i - 1]) {
      throw RangeError("interpolation ratios must be strictly increasing");
    }
  }
  if (tile_dim < 8) throw RangeError("tile_dim must be >= 8, got " + std::to_string(tile_dim));
}

double window_value(double hu, const WindowSpec& win) {
  const double lower = win.level_hu - win.width_hu / 2.0;
  const double t = std::clamp((hu - lower) / win.width_hu, 0.0, 1.0);
  return t * 255.0;
}

SliceImage window_normalize(const Volume& vol, const WindowSpec& win, std::size_t z,
                            bool quantize) {
  win.validate();
  const auto& s = vol.shape();
  if (z >= s.nz) {
    throw IndexError("slice " + std::to_string(z) + " out of range [0, " +
                     std::to_string(s.nz) + ")");
  }
  FloatGrid out(s.slice());
  auto dst = out.values();
  const auto src = vol.values().subspan(z * s.ny * s.nx, s.ny * s.nx);
  for (std::size_t i = 0; i < src.size(); ++i) {
    double v = window_value(src[i], win);
    if (quantize) v = std::round(v);
    dst[i] = static_cast<float>(v);
  }
  return SliceImage(std::move(out));
}

namespace {

// ---- little-endian helpers -------------------------------------------------

void put_u16(std::string& buf, std::uint16_t v) {
  buf.push_back(static_cast<char>(v & 0xFF));
  buf.push_back(static_cast<char>((v >> 8) & 0xFF));
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void dump(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("write failed for " + path.string());
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

// ---- volume header ---------------------------------------------------------

struct RawHeader {
  Shape3 shape;
  Spacing3 spacing;
  ElementType type = ElementType::Int16;
  fs::path payload;
};

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

template <class T>
std::vector<T> parse_numbers(const std::string& text, const std::string& key) {
  std::vector<T> out;
  std::istringstream ss(text);
  std::string tok;
  while (ss >> tok) {
    T v{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw FormatError("bad number '" + tok + "' in header field " + key);
    }
    out.push_back(v);
  }
  return out;
}

RawHeader parse_header(const fs::path& header) {
  std::ifstream in(header);
  if (!in) throw InputError("cannot open volume header " + header.string());

  std::map<std::string, std::string> fields;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("malformed header line: " + line);
    fields[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  auto require = [&](const std::string& key) -> const std::string& {
    auto it = fields.find(key);
    if (it == fields.end()) throw FormatError("volume header missing " + key);
    return it->second;
  };

  RawHeader h;
  const auto ndims = parse_numbers<int>(require("NDims"), "NDims");
  if (ndims.size() != 1 || ndims[0] != 3) throw FormatError("only NDims = 3 is supported");

  const auto dims = parse_numbers<std::size_t>(require("DimSize"), "DimSize");
  if (dims.size() != 3) throw FormatError("DimSize needs three values");
  h.shape = {dims[2], dims[1], dims[0]};
  if (h.shape.size() == 0) throw FormatError("DimSize entries must be >= 1");

  if (auto it = fields.find("ElementSpacing"); it != fields.end()) {
    const auto sp = parse_numbers<double>(it->second, "ElementSpacing");
    if (sp.size() != 3) throw FormatError("ElementSpacing needs three values");
    h.spacing = {sp[2], sp[1], sp[0]};
  }

  const auto& type = require("ElementType");
  if (type == "INT16") {
    h.type = ElementType::Int16;
  } else if (type == "UINT8") {
    h.type = ElementType::UInt8;
  } else {
    throw FormatError("unsupported element type " + type);
  }

  fs::path data = require("ElementDataFile");
  h.payload = data.is_absolute() ? data : header.parent_path() / data;
  return h;
}

void write_header(const fs::path& header, const Shape3& s, const Spacing3& sp,
                  ElementType type, const fs::path& payload_name) {
  std::ostringstream out;
  out << "NDims = 3\n";
  out << "DimSize = " << s.nx << ' ' << s.ny << ' ' << s.nz << '\n';
  out << "ElementSpacing = " << format_double(sp.dx) << ' ' << format_double(sp.dy) << ' '
      << format_double(sp.dz) << '\n';
  out << "ElementType = " << (type == ElementType::Int16 ? "INT16" : "UINT8") << '\n';
  out << "ElementDataFile = " << payload_name.string() << '\n';
  dump(header, out.str());
}

std::string read_payload(const RawHeader& h) {
  auto bytes = slurp(h.payload);
  const std::size_t elem = h.type == ElementType::Int16 ? 2 : 1;
  if (bytes.size() != h.shape.size() * elem) {
    throw FormatError("payload " + h.payload.string() + " holds " +
                      std::to_string(bytes.size() / elem) + " elements, header declares " +
                      std::to_string(h.shape.size()));
  }
  return bytes;
}

fs::path payload_path_for(const fs::path& header) {
  auto p = header;
  p.replace_extension(".raw");
  return p;
}

}  // namespace

Volume read_volume(const fs::path& header) {
  const auto h = parse_header(header);
  const auto bytes = read_payload(h);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::vector<std::int16_t> hu(h.shape.size());
  if (h.type == ElementType::Int16) {
    for (std::size_t i = 0; i < hu.size(); ++i) {
      hu[i] = static_cast<std::int16_t>(get_u16(p + 2 * i));
    }
  } else {
    for (std::size_t i = 0; i < hu.size(); ++i) hu[i] = p[i];
  }
  return Volume(h.shape, h.spacing, std::move(hu));
}

void write_volume(const Volume& vol, const fs::path& header) {
  std::string bytes;
  bytes.reserve(vol.values().size() * 2);
  for (auto v : vol.values()) put_u16(bytes, static_cast<std::uint16_t>(v));
  const auto payload = payload_path_for(header);
  dump(payload, bytes);
  write_header(header, vol.shape(), vol.spacing(), ElementType::Int16, payload.filename());
}

Mask3D read_mask(const fs::path& header) {
  const auto h = parse_header(header);
  const auto bytes = read_payload(h);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::vector<std::uint8_t> bits(h.shape.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const int v = h.type == ElementType::Int16 ? static_cast<std::int16_t>(get_u16(p + 2 * i))
                                               : p[i];
    if (v != 0 && v != 1) {
      throw FormatError("mask " + header.string() + " holds non-binary value " +
                        std::to_string(v));
    }
    bits[i] = static_cast<std::uint8_t>(v);
  }
  return Mask3D(h.shape, h.spacing, std::move(bits));
}

void write_mask(const Mask3D& mask, const fs::path& header) {
  std::string bytes(mask.values().begin(), mask.values().end());
  const auto payload = payload_path_for(header);
  dump(payload, bytes);
  write_header(header, mask.shape(), mask.spacing(), ElementType::UInt8, payload.filename());
}

// ---- STX1 ------------------------------------------------------------------

namespace {
constexpr std::array<char, 8> kMagic = {'S', 'T', 'X', '1', '\0', '\0', '\0', '\0'};
}

void write_tensor(const FloatGrid& grid, const fs::path& path, TensorDType dtype) {
  nlohmann::json head;
  head["dtype"] = dtype == TensorDType::F32 ? "f32" : "u8";
  head["shape"] = {grid.ny(), grid.nx()};
  head["order"] = "C";

  std::string bytes(kMagic.begin(), kMagic.end());
  bytes += head.dump();
  bytes.push_back('\n');
  if (dtype == TensorDType::F32) {
    bytes.reserve(bytes.size() + grid.size() * 4);
    for (float v : grid.values()) {
      std::uint32_t u = 0;
      std::memcpy(&u, &v, 4);
      put_u32(bytes, u);
    }
  } else {
    for (float v : grid.values()) {
      if (!(v >= 0.0F && v <= 255.0F) || v != std::floor(v)) {
        throw RangeError("value " + std::to_string(v) + " is not representable as u8");
      }
      bytes.push_back(static_cast<char>(static_cast<std::uint8_t>(v)));
    }
  }
  dump(path, bytes);
}

Tensor2D read_tensor(const fs::path& path) {
  const auto bytes = slurp(path);
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("bad STX1 magic in " + path.string());
  }
  const auto nl = bytes.find('\n', kMagic.size());
  if (nl == std::string::npos) throw FormatError("unterminated STX1 header in " + path.string());

  nlohmann::json head;
  try {
    head = nlohmann::json::parse(bytes.begin() + kMagic.size(),
                                 bytes.begin() + static_cast<std::ptrdiff_t>(nl));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("unparseable STX1 header in " + path.string() + ": " + e.what());
  }

  Tensor2D t;
  std::vector<std::size_t> shape;
  try {
    const auto dtype = head.at("dtype").get<std::string>();
    if (dtype == "f32") {
      t.dtype = TensorDType::F32;
    } else if (dtype == "u8") {
      t.dtype = TensorDType::U8;
    } else {
      throw FormatError("unsupported STX1 dtype " + dtype);
    }
    if (head.value("order", std::string("C")) != "C") {
      throw FormatError("only C order STX1 tensors are supported");
    }
    shape = head.at("shape").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("invalid STX1 header in " + path.string() + ": " + e.what());
  }
  if (shape.size() != 2) throw FormatError("STX1 tensor must be 2-dimensional");

  const Shape2 s{shape[0], shape[1]};
  const std::size_t elem = t.dtype == TensorDType::F32 ? 4 : 1;
  const std::size_t have = bytes.size() - nl - 1;
  if (have != s.size() * elem) {
    throw FormatError("STX1 payload in " + path.string() + " has " + std::to_string(have) +
                      " bytes, shape " + to_string(s) + " needs " +
                      std::to_string(s.size() * elem));
  }

  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + nl + 1);
  std::vector<float> values(s.size());
  if (t.dtype == TensorDType::F32) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::uint32_t u = get_u32(p + 4 * i);
      std::memcpy(&values[i], &u, 4);
    }
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = p[i];
  }
  t.data = FloatGrid(s, std::move(values));
  return t;
}

SliceImage read_slice_image(const fs::path& path) {
  return SliceImage(read_tensor(path).data);
}

ProbMap read_prob_map(const fs::path& path) {
  try {
    return ProbMap(read_tensor(path).data);
  } catch (const RangeError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace msairway
