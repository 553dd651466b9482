#pragma once

#include <unsupported/Eigen/AutoDiff>

#include "planeline/core.hpp"

namespace planeline {

/// Forward-mode scalar carrying derivatives w.r.t. one plane's 11 parameters.
using Jet = Eigen::AutoDiffScalar<PlaneParams>;

inline ParamsT<Jet> seed_params(const PlaneParams& params) {
  ParamsT<Jet> seeded;
  for (int i = 0; i < kPlaneParamCount; ++i) {
    seeded(i) = Jet(params(i), kPlaneParamCount, i);
  }
  return seeded;
}

/// Parameters as constants (zero derivatives).
inline ParamsT<Jet> constant_params(const PlaneParams& params) {
  ParamsT<Jet> out;
  for (int i = 0; i < kPlaneParamCount; ++i) out(i) = Jet(params(i));
  return out;
}

inline double value_of(double x) { return x; }
template <typename D>
double value_of(const Eigen::AutoDiffScalar<D>& x) {
  return x.value();
}

/// Euclidean norm with a zero derivative at the origin instead of NaN.
template <typename T, int N>
T safe_norm(const Eigen::Matrix<T, N, 1>& v) {
  using std::sqrt;
  const T sq = v.squaredNorm();
  if (!(value_of(sq) > 0.0)) return T(0);
  return sqrt(sq);
}

}  // namespace planeline
