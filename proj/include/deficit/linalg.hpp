#pragma once

#include <Eigen/Core>

namespace deficit {

inline constexpr int kMaxDim = 3;

/// Point or gradient in R^n, n <= 3. Fixed capacity, never heap-allocates.
using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
/// Symmetric n x n matrix (Hessians), n <= 3.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
/// Gradient on the reduced lift space R^n x R_+: x-part followed by the radial part.
using LiftVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim + 1, 1>;

}  // namespace deficit
