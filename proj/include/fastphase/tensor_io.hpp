#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fastphase/tensor.hpp"

namespace fastphase {

// FPT1 layout: "FPT1", dtype byte (1 real64, 2 complex128), rank byte,
// rank little-endian u64 dims, then little-endian f64 payload (complex
// interleaved re, im), row-major, no padding.
enum class TensorDtype : std::uint8_t { kReal64 = 0x01, kComplex128 = 0x02 };

using AnyGrid = std::variant<RealGrid, ComplexGrid>;

std::vector<std::uint8_t> encode_tensor(const RealGrid& g);
std::vector<std::uint8_t> encode_tensor(const ComplexGrid& g);
AnyGrid decode_tensor(const std::vector<std::uint8_t>& bytes);

void write_tensor(const std::string& path, const RealGrid& g);
void write_tensor(const std::string& path, const ComplexGrid& g);
AnyGrid read_tensor(const std::string& path);
// Typed readers raise FormatError (offset 4, the dtype byte) on a tag mismatch.
RealGrid read_real_tensor(const std::string& path);
ComplexGrid read_complex_tensor(const std::string& path);

}  // namespace fastphase
