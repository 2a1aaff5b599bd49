#include "lml/tensor.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lml {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be >= 1");
  // Rejection sampling to stay unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

std::uint64_t Rng::derive(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t s = base ^ (0x6a09e667f3bcc909ULL + salt * 0x9e3779b97f4a7c15ULL);
  return splitmix64(s);
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (m.cols != v.size()) {
    throw std::invalid_argument("matvec: matrix has " + std::to_string(m.cols) +
                                " columns but vector has " + std::to_string(v.size()) +
                                " entries");
  }
  Vector out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
  return out;
}

Vector matvec_transpose(const Matrix& m, const Vector& v) {
  if (m.rows != v.size()) {
    throw std::invalid_argument("matvec_transpose: matrix has " + std::to_string(m.rows) +
                                " rows but vector has " + std::to_string(v.size()) +
                                " entries");
  }
  Vector out(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = m.row(i);
    const double g = v[i];
    if (g == 0.0) continue;
    for (std::size_t j = 0; j < m.cols; ++j) out[j] += g * row[j];
  }
  return out;
}

Vector hadamard(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("hadamard: lengths differ (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: lengths differ (" + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

Vector rng_normal(Rng& r, std::size_t n) {
  if (n < 1) throw std::invalid_argument("rng_normal: n must be >= 1");
  Vector out(n);
  for (auto& x : out) x = r.normal();
  return out;
}

bool all_finite(const Vector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

void shuffle(std::vector<std::size_t>& order, Rng& rng) {
  if (order.size() < 2) return;
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::size_t j = rng.below(i + 1);
    std::swap(order[i], order[j]);
  }
}

}  // namespace lml
