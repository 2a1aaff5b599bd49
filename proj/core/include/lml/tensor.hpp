#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace lml {

using Vector = std::vector<double>;

// Dense row-major matrix. rows*cols == data.size() always.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
};

/// Deterministic xoshiro256** generator seeded through splitmix64.
/// The same 64-bit seed yields the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal draw (Box-Muller over uniform()); pairs are cached,
  /// so draws come two ticks of the uniform stream at a time.
  double normal();

  /// Uniform integer in [0, bound). bound must be >= 1.
  std::uint64_t below(std::uint64_t bound);

  /// Stateless mix of (base, salt) into a fresh seed for a child stream.
  static std::uint64_t derive(std::uint64_t base, std::uint64_t salt);

 private:
  std::array<std::uint64_t, 4> state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

Vector matvec(const Matrix& m, const Vector& v);
Vector matvec_transpose(const Matrix& m, const Vector& v);
Vector hadamard(const Vector& a, const Vector& b);
double dot(const Vector& a, const Vector& b);

/// n independent standard-normal draws.
Vector rng_normal(Rng& r, std::size_t n);

bool all_finite(const Vector& v);

/// In-place Fisher-Yates shuffle driven by rng.below.
void shuffle(std::vector<std::size_t>& order, Rng& rng);

}  // namespace lml
