#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "qpcd/lp.hpp"
#include "qpcd/model.hpp"

namespace qpcd {

/// SplitMix64: output k is mix(seed + k * 0x9E3779B97F4A7C15).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

enum class Family { cqmax, pcqmax };

inline const char* to_string(Family f) { return f == Family::cqmax ? "cqmax" : "pcqmax"; }

struct GenSpec {
  Family family = Family::cqmax;
  Index n = 10;
  int count = 1;
  std::uint64_t seed = 0;
};

namespace detail {

/// Keeps a maximal set of linearly independent rows of [A b].
inline void drop_redundant_rows(Matrix& A, Vector& b) {
  std::vector<Index> keep;
  Matrix basis(0, A.cols() + 1);
  for (Index i = 0; i < A.rows(); ++i) {
    Matrix trial(basis.rows() + 1, A.cols() + 1);
    trial.topRows(basis.rows()) = basis;
    trial.row(basis.rows()) << A.row(i), b(i);
    if (numerical_rank(trial) > basis.rows()) {
      basis = trial;
      keep.push_back(i);
    }
  }
  if (static_cast<Index>(keep.size()) == A.rows()) return;
  Matrix A2(static_cast<Index>(keep.size()), A.cols());
  Vector b2(static_cast<Index>(keep.size()));
  for (size_t k = 0; k < keep.size(); ++k) {
    A2.row(k) = A.row(keep[k]);
    b2(k) = b(keep[k]);
  }
  A = A2;
  b = b2;
}

inline bool polytope_bounded(const Matrix& A, const Vector& b) {
  LpProblem lp;
  lp.sense = Sense::maximize;
  lp.c = Vector::Ones(A.cols());
  lp.Aeq = A;
  lp.beq = b;
  lp.Aub = Matrix(0, A.cols());
  lp.bub = Vector(0);
  return solve_lp(lp).status == LpStatus::optimal;
}

}  // namespace detail

inline QpInstance generate_one(Family family, Index n, std::uint64_t stream_seed, const std::string& name) {
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "generator needs n >= 4");
  SplitMix64 rng(stream_seed);
  const bool pos = family == Family::pcqmax;
  const Index mlo = std::max<Index>(1, static_cast<Index>(std::ceil(0.1 * static_cast<double>(n) - 1e-12)));
  const Index mhi = std::max(mlo, static_cast<Index>(std::floor(0.5 * static_cast<double>(n) + 1e-12)));
  QpInstance inst;
  inst.name = name;
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    const Index m = mlo + static_cast<Index>(rng.uniform() * static_cast<double>(mhi - mlo + 1));
    Matrix A(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) A(i, j) = rng.uniform(pos ? 0.0 : -20.0, 20.0);
    Vector x0(n);
    for (Index j = 0; j < n; ++j) x0(j) = rng.uniform();
    Vector b = A * x0 / x0.norm();
    detail::drop_redundant_rows(A, b);
    if (detail::polytope_bounded(A, b)) {
      inst.A = A;
      inst.b = b;
      ok = true;
    }
  }
  if (!ok) throw Error(ErrorCode::GenerationStalled, "no bounded polytope after 100 attempts");
  Matrix U(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) U(i, j) = rng.uniform(pos ? 0.0 : -1.0, 1.0);
  inst.p.resize(n);
  for (Index j = 0; j < n; ++j) inst.p(j) = rng.uniform(pos ? 0.0 : -10.0, 10.0);
  Vector h(n);
  for (Index j = 0; j < n; ++j) h(j) = rng.uniform();
  const double alpha = rng.uniform(10.0, 11.0);
  const Matrix H0 = symmetrize(U * h.asDiagonal() * U.transpose());
  const double norm = lambda_max(H0);
  inst.H = symmetrize(static_cast<double>(n) * alpha * H0 / norm);
  return inst;
}

inline std::vector<QpInstance> generate(const GenSpec& spec) {
  if (spec.count < 1) throw Error(ErrorCode::InvalidArgument, "count must be positive");
  std::vector<QpInstance> out;
  for (int i = 0; i < spec.count; ++i) {
    const std::uint64_t stream = SplitMix64::mix(spec.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1));
    const std::string name = std::string(to_string(spec.family)) + "_n" + std::to_string(spec.n) + "_s" +
                             std::to_string(spec.seed) + "_" + std::to_string(i);
    out.push_back(generate_one(spec.family, spec.n, stream, name));
  }
  return out;
}

/// n(n+1)(2n+1)/6 computed in integer arithmetic.
inline double bio_reference_value(std::uint64_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  return static_cast<double>(n * (n + 1) / 2 * (2 * n + 1) / 3);
}

}  // namespace qpcd
