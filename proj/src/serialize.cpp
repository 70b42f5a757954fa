#include "pasa/serialize.hpp"

#include <cstring>
#include <fstream>

#include "pasa/error.hpp"

namespace pasa {

namespace {

constexpr char kMagic[8] = {'P', 'A', 'S', 'A', 'P', 'S', '0', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(os, bits);
}

void write_string(std::ostream& os, const std::string& s) {
  write_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw ParseError(path + ": truncated file");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t read_u64(std::istream& is, const std::string& path) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw ParseError(path + ": truncated file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double read_f64(std::istream& is, const std::string& path) {
  const std::uint64_t bits = read_u64(is, path);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string read_string(std::istream& is, const std::string& path) {
  const std::uint32_t n = read_u32(is, path);
  std::string s(n, '\0');
  if (n > 0 && !is.read(s.data(), n)) throw ParseError(path + ": truncated string");
  return s;
}

}  // namespace

void save_paramset(const std::string& path, const ParamSet& params,
                   const std::map<std::string, std::string>& metadata) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os.write(kMagic, 8);
  write_u32(os, static_cast<std::uint32_t>(metadata.size()));
  for (const auto& [k, v] : metadata) {
    write_string(os, k);
    write_string(os, v);
  }
  write_u32(os, static_cast<std::uint32_t>(params.size()));
  for (const std::string& name : params.names()) {
    const Tensor& t = params.at(name);
    write_string(os, name);
    write_u32(os, static_cast<std::uint32_t>(t.shape().size()));
    for (std::size_t d : t.shape()) write_u64(os, d);
    for (double v : t.values()) write_f64(os, v);
  }
  if (!os) throw IoError("write failed for '" + path + "'");
}

LoadedParamSet load_paramset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw ParseError(path + ": not a PASAPS01 parameter file");
  }
  LoadedParamSet out;
  const std::uint32_t meta_count = read_u32(is, path);
  for (std::uint32_t i = 0; i < meta_count; ++i) {
    std::string k = read_string(is, path);
    std::string v = read_string(is, path);
    out.metadata[std::move(k)] = std::move(v);
  }
  const std::uint32_t tensor_count = read_u32(is, path);
  for (std::uint32_t i = 0; i < tensor_count; ++i) {
    std::string name = read_string(is, path);
    const std::uint32_t ndim = read_u32(is, path);
    std::vector<std::size_t> shape(ndim);
    std::size_t n = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      shape[d] = static_cast<std::size_t>(read_u64(is, path));
      n *= shape[d];
    }
    std::vector<double> values(n);
    for (std::size_t j = 0; j < n; ++j) values[j] = read_f64(is, path);
    out.params.add(name, Tensor::from(std::move(shape), std::move(values), true));
  }
  return out;
}

}  // namespace pasa
