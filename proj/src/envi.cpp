#include "archetype/envi.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "archetype/error.hpp"

namespace archetype {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(path + ": " + what);
}

std::string trim(const std::string& s) {
  const auto start = s.find_first_not_of(" \t\r\n");
  if (start == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(start, end - start + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// key = value pairs; a value opening with '{' runs to the matching '}',
// possibly across lines.
std::map<std::string, std::string> parse_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open header");

  std::string line;
  bool saw_sentinel = false;
  std::map<std::string, std::string> fields;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (!saw_sentinel) {
      if (lower(t) != "envi") fail(path, "not an ENVI header (missing ENVI sentinel)");
      saw_sentinel = true;
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = lower(trim(t.substr(0, eq)));
    std::string value = trim(t.substr(eq + 1));
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos && std::getline(in, line)) {
        value += ' ';
        value += trim(line);
      }
      if (value.find('}') == std::string::npos) fail(path, "unterminated { } value for " + key);
    }
    fields[key] = value;
  }
  if (!saw_sentinel) fail(path, "not an ENVI header (missing ENVI sentinel)");
  return fields;
}

std::size_t required_count(const std::map<std::string, std::string>& fields,
                           const std::string& key, const std::string& path) {
  const auto it = fields.find(key);
  if (it == fields.end()) fail(path, "header missing required field '" + key + "'");
  const std::string v = trim(it->second);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    fail(path, "field '" + key + "' must be a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(std::stoull(v));
}

std::vector<double> parse_wavelengths(const std::string& value, const std::string& path) {
  const auto open = value.find('{');
  const auto close = value.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open)
    fail(path, "malformed wavelength list");
  std::vector<double> out;
  std::istringstream body(value.substr(open + 1, close - open - 1));
  std::string token;
  while (std::getline(body, token, ',')) {
    const std::string t = trim(token);
    if (t.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      fail(path, "malformed wavelength entry '" + t + "'");
    }
  }
  return out;
}

}  // namespace

std::string envi_data_path(const std::string& header_path) {
  namespace fs = std::filesystem;
  std::string base = header_path;
  const std::string suffix = ".hdr";
  if (base.size() > suffix.size() &&
      lower(base.substr(base.size() - suffix.size())) == suffix) {
    base = base.substr(0, base.size() - suffix.size());
  }
  for (const std::string candidate : {base, base + ".img", base + ".dat", base + ".raw"}) {
    if (candidate != header_path && fs::exists(candidate)) return candidate;
  }
  throw Error(header_path + ": no companion data file (tried '" + base + "' plus .img/.dat/.raw)");
}

HsiImage read_envi(const std::string& header_path, const std::string& data_path) {
  const auto fields = parse_header(header_path);

  const std::size_t samples = required_count(fields, "samples", header_path);
  const std::size_t lines = required_count(fields, "lines", header_path);
  const std::size_t bands = required_count(fields, "bands", header_path);
  if (samples == 0 || lines == 0 || bands == 0)
    fail(header_path, "image dimensions must be positive");

  const auto interleave = fields.find("interleave");
  if (interleave == fields.end())
    fail(header_path, "header missing required field 'interleave'");
  if (lower(trim(interleave->second)) != "bsq")
    fail(header_path, "unsupported interleave '" + trim(interleave->second) + "' (only bsq)");

  const std::size_t data_type = required_count(fields, "data type", header_path);
  if (data_type != 4 && data_type != 5)
    fail(header_path,
         "unsupported data type " + std::to_string(data_type) + " (only 4 and 5)");

  if (const auto it = fields.find("byte order"); it != fields.end()) {
    if (trim(it->second) != "0")
      fail(header_path, "unsupported byte order " + trim(it->second) + " (only 0)");
  }

  std::size_t offset = 0;
  if (const auto it = fields.find("header offset"); it != fields.end())
    offset = required_count(fields, "header offset", header_path);

  const std::size_t item = data_type == 4 ? 4 : 8;
  const std::size_t pixels = lines * samples;
  const std::size_t payload = bands * pixels * item;

  std::ifstream in(data_path, std::ios::binary);
  if (!in) fail(data_path, "cannot open data file");
  in.seekg(static_cast<std::streamoff>(offset));
  std::vector<char> raw(payload);
  in.read(raw.data(), static_cast<std::streamsize>(payload));
  if (static_cast<std::size_t>(in.gcount()) != payload)
    fail(data_path, "truncated data file (expected " + std::to_string(offset + payload) +
                        " bytes)");

  HsiImage image;
  image.data = Matrix(bands, pixels);
  // BSQ: whole band planes in sequence, each plane row-major over the
  // spatial grid; that matches the matrix layout bandwise.
  for (std::size_t b = 0; b < bands; ++b) {
    double* dst = image.data.row(b);
    const char* src = raw.data() + b * pixels * item;
    if (data_type == 4) {
      for (std::size_t j = 0; j < pixels; ++j) {
        float v = 0.0f;
        std::memcpy(&v, src + j * 4, 4);
        dst[j] = static_cast<double>(v);
      }
    } else {
      std::memcpy(dst, src, pixels * 8);
    }
  }
  image.spatial = Shape2d{lines, samples};
  if (const auto it = fields.find("wavelength"); it != fields.end())
    image.wavelengths = parse_wavelengths(it->second, header_path);
  return image;
}

}  // namespace archetype
