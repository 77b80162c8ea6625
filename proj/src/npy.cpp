#include "archetype/npy.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "archetype/error.hpp"

namespace archetype {

namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(path + ": " + what);
}

// Pulls the quoted string after `key` out of the header dict.
std::string dict_string(const std::string& header, const std::string& key,
                        const std::string& path) {
  const auto key_pos = header.find("'" + key + "'");
  if (key_pos == std::string::npos) fail(path, "header missing '" + key + "'");
  const auto open = header.find('\'', key_pos + key.size() + 2);
  if (open == std::string::npos) fail(path, "malformed header value for '" + key + "'");
  const auto close = header.find('\'', open + 1);
  if (close == std::string::npos) fail(path, "malformed header value for '" + key + "'");
  return header.substr(open + 1, close - open - 1);
}

bool dict_bool(const std::string& header, const std::string& key, const std::string& path) {
  const auto key_pos = header.find("'" + key + "'");
  if (key_pos == std::string::npos) fail(path, "header missing '" + key + "'");
  const auto rest = header.substr(key_pos + key.size() + 2);
  const auto true_pos = rest.find("True");
  const auto false_pos = rest.find("False");
  if (true_pos == std::string::npos && false_pos == std::string::npos)
    fail(path, "malformed header value for '" + key + "'");
  if (true_pos == std::string::npos) return false;
  if (false_pos == std::string::npos) return true;
  return true_pos < false_pos;
}

std::vector<std::size_t> dict_shape(const std::string& header, const std::string& path) {
  const auto key_pos = header.find("'shape'");
  if (key_pos == std::string::npos) fail(path, "header missing 'shape'");
  const auto open = header.find('(', key_pos);
  const auto close = header.find(')', key_pos);
  if (open == std::string::npos || close == std::string::npos || close < open)
    fail(path, "malformed shape tuple");
  std::vector<std::size_t> shape;
  std::string token;
  std::istringstream body(header.substr(open + 1, close - open - 1));
  while (std::getline(body, token, ',')) {
    std::size_t start = token.find_first_not_of(" \t");
    if (start == std::string::npos) continue;  // trailing comma of 1-tuples
    std::size_t end = token.find_last_not_of(" \t");
    const std::string digits = token.substr(start, end - start + 1);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      fail(path, "malformed shape tuple");
    shape.push_back(static_cast<std::size_t>(std::stoull(digits)));
  }
  return shape;
}

}  // namespace

std::size_t NpyArray::element_count() const {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

NpyArray read_npy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");

  char magic[8] = {};
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 6) != 0) fail(path, "not an NPY file (bad magic)");
  const unsigned major = static_cast<unsigned char>(magic[6]);
  if (major != 1 && major != 2) {
    fail(path, "unsupported NPY format version " + std::to_string(major));
  }

  std::uint32_t header_len = 0;
  if (major == 1) {
    std::uint16_t len16 = 0;
    in.read(reinterpret_cast<char*>(&len16), 2);
    header_len = len16;
  } else {
    in.read(reinterpret_cast<char*>(&header_len), 4);
  }
  if (!in) fail(path, "truncated header");

  std::string header(header_len, '\0');
  in.read(header.data(), header_len);
  if (!in) fail(path, "truncated header");

  const std::string descr = dict_string(header, "descr", path);
  if (descr != "<f4" && descr != "<f8") {
    fail(path, "unsupported dtype '" + descr + "' (need <f4 or <f8)");
  }
  if (dict_bool(header, "fortran_order", path)) {
    fail(path, "Fortran-order arrays are not supported");
  }

  NpyArray array;
  array.dtype = descr == "<f4" ? NpyDtype::f4 : NpyDtype::f8;
  array.shape = dict_shape(header, path);
  if (array.shape.empty()) fail(path, "zero-dimensional array");

  const std::size_t count = array.element_count();
  const std::size_t item = array.dtype == NpyDtype::f4 ? 4 : 8;
  std::vector<char> raw(count * item);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) fail(path, "truncated data section");

  array.values.resize(count);
  if (array.dtype == NpyDtype::f4) {
    for (std::size_t i = 0; i < count; ++i) {
      float v = 0.0f;
      std::memcpy(&v, raw.data() + i * 4, 4);
      array.values[i] = static_cast<double>(v);
    }
  } else {
    std::memcpy(array.values.data(), raw.data(), raw.size());
  }
  return array;
}

void write_npy(const std::string& path, std::span<const std::size_t> shape,
               std::span<const double> values, NpyDtype dtype) {
  if (shape.empty()) throw Error(path + ": refusing to write a zero-dimensional array");
  std::size_t count = 1;
  for (std::size_t d : shape) count *= d;
  if (count != values.size()) throw Error(path + ": shape does not match value count");

  std::ostringstream dict;
  dict << "{'descr': '" << (dtype == NpyDtype::f4 ? "<f4" : "<f8")
       << "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) dict << ",";
    if (i + 1 < shape.size()) dict << " ";
  }
  dict << "), }";

  std::string header = dict.str();
  const std::size_t unpadded = 8 + 2 + header.size() + 1;
  const std::size_t padded = (unpadded + 63) / 64 * 64;
  header.append(padded - unpadded, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path + ": cannot open file for writing");
  out.write(kMagic, 6);
  out.put('\x01');
  out.put('\x00');
  const auto len16 = static_cast<std::uint16_t>(header.size());
  if (header.size() > 0xffff) throw Error(path + ": header too large for format version 1.0");
  out.write(reinterpret_cast<const char*>(&len16), 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  if (dtype == NpyDtype::f4) {
    std::vector<float> narrow(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) narrow[i] = static_cast<float>(values[i]);
    out.write(reinterpret_cast<const char*>(narrow.data()),
              static_cast<std::streamsize>(narrow.size() * 4));
  } else {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * 8));
  }
  if (!out) throw Error(path + ": write failed");
}

Matrix npy_to_matrix(const NpyArray& array) {
  if (array.shape.size() != 2) throw Error("expected a 2-D array");
  Matrix m(array.shape[0], array.shape[1]);
  std::copy(array.values.begin(), array.values.end(), m.values().begin());
  return m;
}

HsiImage npy_to_image(const NpyArray& array) {
  HsiImage image;
  if (array.shape.size() == 2) {
    image.data = npy_to_matrix(array);
    return image;
  }
  if (array.shape.size() != 3) throw Error("expected a 2-D matrix or 3-D cube");
  const std::size_t h = array.shape[0];
  const std::size_t w = array.shape[1];
  const std::size_t l = array.shape[2];
  Matrix data(l, h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t pixel = r * w + c;
      const double* src = array.values.data() + (r * w + c) * l;
      for (std::size_t b = 0; b < l; ++b) data(b, pixel) = src[b];
    }
  }
  image.data = std::move(data);
  image.spatial = Shape2d{h, w};
  return image;
}

}  // namespace archetype
