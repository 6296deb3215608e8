#pragma once

// Binary matrix files for cached dictionaries and designed measurement
// matrices.
//
// Layout (little-endian):
//   char[8]  magic "BCSRMAT1"
//   u32      scalar tag (1 = float64, 2 = complex128, 3 = complex64)
//   u32      reserved, zero
//   u64      rows
//   u64      cols
//   u64      scenario hash
//   char[32] ordering tag, NUL padded
//   payload  row-major

#include <cstdint>
#include <filesystem>
#include <string>

#include "bcsr/types.hpp"

namespace bcsr {

enum class ScalarTag : std::uint32_t { float64 = 1, complex128 = 2, complex64 = 3 };

struct MatrixHeader {
  ScalarTag scalar = ScalarTag::float64;
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
  std::uint64_t scenario_hash = 0;
  std::string ordering;
};

void write_matrix(const std::filesystem::path& path, const RealMatrix& m,
                  std::uint64_t scenario_hash, const std::string& ordering);
/// `single_precision` stores complex64 instead of complex128.
void write_matrix(const std::filesystem::path& path, const ComplexMatrix& m,
                  std::uint64_t scenario_hash, const std::string& ordering,
                  bool single_precision = false);

MatrixHeader read_matrix_header(const std::filesystem::path& path);

/// Throws std::runtime_error if the stored hash differs from
/// `expected_hash` or the scalar type does not match.
RealMatrix read_real_matrix(const std::filesystem::path& path, std::uint64_t expected_hash);
ComplexMatrix read_complex_matrix(const std::filesystem::path& path,
                                  std::uint64_t expected_hash);

}  // namespace bcsr
