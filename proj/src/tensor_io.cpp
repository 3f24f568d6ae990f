#include "fastphase/tensor_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>

namespace fastphase {

namespace {

constexpr char kMagic[4] = {'F', 'P', 'T', '1'};
constexpr std::size_t kMaxRank = 32;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(const std::vector<std::uint8_t>& in, std::size_t pos) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(in[pos + b]) << (8 * b);
  return v;
}

void put_header(std::vector<std::uint8_t>& out, TensorDtype dtype, const Shape& shape) {
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(static_cast<std::uint8_t>(dtype));
  if (shape.rank() > 255) throw DimensionError("rank too large for FPT1");
  out.push_back(static_cast<std::uint8_t>(shape.rank()));
  for (auto n : shape.dims()) put_u64(out, n);
}

const char* dtype_name(TensorDtype t) { return t == TensorDtype::kReal64 ? "real64" : "complex128"; }

}  // namespace

std::vector<std::uint8_t> encode_tensor(const RealGrid& g) {
  std::vector<std::uint8_t> out;
  out.reserve(6 + 8 * g.shape().rank() + 8 * g.size());
  put_header(out, TensorDtype::kReal64, g.shape());
  for (double v : g) put_f64(out, v);
  return out;
}

std::vector<std::uint8_t> encode_tensor(const ComplexGrid& g) {
  std::vector<std::uint8_t> out;
  out.reserve(6 + 8 * g.shape().rank() + 16 * g.size());
  put_header(out, TensorDtype::kComplex128, g.shape());
  for (const auto& v : g) {
    put_f64(out, v.real());
    put_f64(out, v.imag());
  }
  return out;
}

AnyGrid decode_tensor(const std::vector<std::uint8_t>& in) {
  if (in.size() < 4) throw FormatError("truncated magic", in.size());
  for (std::size_t i = 0; i < 4; ++i)
    if (in[i] != static_cast<std::uint8_t>(kMagic[i])) throw FormatError("bad magic, expected FPT1", i);
  if (in.size() < 5) throw FormatError("missing dtype tag", 4);
  const auto tag = in[4];
  if (tag != 0x01 && tag != 0x02) throw FormatError("unknown dtype tag " + std::to_string(tag), 4);
  const auto dtype = static_cast<TensorDtype>(tag);
  if (in.size() < 6) throw FormatError("missing rank", 5);
  const std::size_t rank = in[5];
  if (rank == 0 || rank > kMaxRank) throw FormatError("invalid rank " + std::to_string(rank), 5);
  std::size_t pos = 6;
  std::vector<std::size_t> dims;
  std::uint64_t count = 1;
  for (std::size_t a = 0; a < rank; ++a) {
    if (in.size() < pos + 8) throw FormatError("truncated shape", in.size());
    const auto n = get_u64(in, pos);
    if (n == 0) throw FormatError("zero-length axis", pos);
    if (count > (std::uint64_t{1} << 48) / n) throw FormatError("shape too large", pos);
    count *= n;
    dims.push_back(static_cast<std::size_t>(n));
    pos += 8;
  }
  const std::uint64_t per = dtype == TensorDtype::kReal64 ? 8 : 16;
  const std::uint64_t expected = pos + count * per;
  if (in.size() < expected) throw FormatError("truncated payload", in.size());
  if (in.size() > expected) throw FormatError("trailing bytes after payload", expected);
  Shape shape(std::move(dims));
  if (dtype == TensorDtype::kReal64) {
    RealGrid g(shape);
    for (std::size_t i = 0; i < g.size(); ++i, pos += 8) g[i] = std::bit_cast<double>(get_u64(in, pos));
    return g;
  }
  ComplexGrid g(shape);
  for (std::size_t i = 0; i < g.size(); ++i, pos += 16)
    g[i] = Complex(std::bit_cast<double>(get_u64(in, pos)), std::bit_cast<double>(get_u64(in, pos + 8)));
  return g;
}

namespace {

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing '" + path + "'");
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace

void write_tensor(const std::string& path, const RealGrid& g) { write_bytes(path, encode_tensor(g)); }
void write_tensor(const std::string& path, const ComplexGrid& g) { write_bytes(path, encode_tensor(g)); }

AnyGrid read_tensor(const std::string& path) {
  try {
    return decode_tensor(read_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.message(), e.offset());
  }
}

RealGrid read_real_tensor(const std::string& path) {
  auto any = read_tensor(path);
  if (auto* g = std::get_if<RealGrid>(&any)) return std::move(*g);
  throw FormatError(path + ": dtype tag is " + dtype_name(TensorDtype::kComplex128) + ", expected real64", 4);
}

ComplexGrid read_complex_tensor(const std::string& path) {
  auto any = read_tensor(path);
  if (auto* g = std::get_if<ComplexGrid>(&any)) return std::move(*g);
  throw FormatError(path + ": dtype tag is " + dtype_name(TensorDtype::kReal64) + ", expected complex128", 4);
}

}  // namespace fastphase
