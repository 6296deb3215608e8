#include "bcsr/matrix_io.hpp"

#include <array>
#include <bit>
#include <complex>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace bcsr {

static_assert(std::endian::native == std::endian::little,
              "matrix files are written in host order, which must be little-endian");

namespace {

constexpr std::array<char, 8> kMagic = {'B', 'C', 'S', 'R', 'M', 'A', 'T', '1'};
constexpr std::size_t kOrderingBytes = 32;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("matrix file truncated");
  return v;
}

std::ofstream open_with_header(const std::filesystem::path& path, ScalarTag tag, Index rows,
                               Index cols, std::uint64_t hash, const std::string& ordering) {
  if (ordering.size() > kOrderingBytes) throw std::invalid_argument("ordering tag too long");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put(out, static_cast<std::uint32_t>(tag));
  put(out, std::uint32_t{0});
  put(out, static_cast<std::uint64_t>(rows));
  put(out, static_cast<std::uint64_t>(cols));
  put(out, hash);
  std::array<char, kOrderingBytes> tag_bytes{};
  std::memcpy(tag_bytes.data(), ordering.data(), ordering.size());
  out.write(tag_bytes.data(), tag_bytes.size());
  return out;
}

MatrixHeader parse_header(std::ifstream& in, const std::filesystem::path& path) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw std::runtime_error(path.string() + " is not a matrix file");
  MatrixHeader h;
  h.scalar = static_cast<ScalarTag>(get<std::uint32_t>(in));
  get<std::uint32_t>(in);
  h.rows = get<std::uint64_t>(in);
  h.cols = get<std::uint64_t>(in);
  h.scenario_hash = get<std::uint64_t>(in);
  std::array<char, kOrderingBytes> tag_bytes{};
  in.read(tag_bytes.data(), tag_bytes.size());
  if (!in) throw std::runtime_error("matrix file truncated");
  h.ordering.assign(tag_bytes.data(), strnlen(tag_bytes.data(), tag_bytes.size()));
  return h;
}

std::ifstream open_checked(const std::filesystem::path& path, std::uint64_t expected_hash,
                           MatrixHeader& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  header = parse_header(in, path);
  if (header.scenario_hash != expected_hash)
    throw std::runtime_error(path.string() + " was written for a different scenario");
  return in;
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const RealMatrix& m,
                  std::uint64_t scenario_hash, const std::string& ordering) {
  auto out = open_with_header(path, ScalarTag::float64, m.rows(), m.cols(), scenario_hash,
                              ordering);
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) put(out, m(r, c));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_matrix(const std::filesystem::path& path, const ComplexMatrix& m,
                  std::uint64_t scenario_hash, const std::string& ordering,
                  bool single_precision) {
  const ScalarTag tag = single_precision ? ScalarTag::complex64 : ScalarTag::complex128;
  auto out = open_with_header(path, tag, m.rows(), m.cols(), scenario_hash, ordering);
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) {
      if (single_precision)
        put(out, std::complex<float>(m(r, c)));
      else
        put(out, m(r, c));
    }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

MatrixHeader read_matrix_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_header(in, path);
}

RealMatrix read_real_matrix(const std::filesystem::path& path, std::uint64_t expected_hash) {
  MatrixHeader h;
  auto in = open_checked(path, expected_hash, h);
  if (h.scalar != ScalarTag::float64) throw std::runtime_error("expected a real matrix");
  RealMatrix m(static_cast<Index>(h.rows), static_cast<Index>(h.cols));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) m(r, c) = get<double>(in);
  return m;
}

ComplexMatrix read_complex_matrix(const std::filesystem::path& path,
                                  std::uint64_t expected_hash) {
  MatrixHeader h;
  auto in = open_checked(path, expected_hash, h);
  if (h.scalar != ScalarTag::complex128 && h.scalar != ScalarTag::complex64)
    throw std::runtime_error("expected a complex matrix");
  ComplexMatrix m(static_cast<Index>(h.rows), static_cast<Index>(h.cols));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      m(r, c) = h.scalar == ScalarTag::complex64 ? Complex(get<std::complex<float>>(in))
                                                 : get<Complex>(in);
  return m;
}

}  // namespace bcsr
