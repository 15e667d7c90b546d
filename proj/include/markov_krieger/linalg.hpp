// Small Eigen helpers shared by the measure and classifier layers: row
// distributions, stochasticity checks, and stationary vectors of primitive
// stochastic matrices. Eigen is the only math dependency of the library.
#pragma once

#include <Eigen/Dense>

#include "markov_krieger/errors.hpp"

namespace mk {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// Tolerances pinned once for the whole library.
inline constexpr double kStochasticTol = 1e-12;   // ingestion: row sums, entry signs
inline constexpr double kProductTol = 1e-10;      // after long products
inline constexpr double kStationaryTol = 1e-12;   // residual of pi = pi P
inline constexpr double kMatrixEqTol = 1e-10;     // matrix comparisons in verdicts
inline constexpr double kOracleTol = 1e-12;       // cross-route agreement

// True when every entry is nonnegative (within tol) and every row sums to 1.
bool is_stochastic(Eigen::Ref<const Matrix> p, double tol = kStochasticTol);

// Unique stationary row vector pi with pi P = pi, sum 1, for a stochastic P
// whose support is primitive. Solved as a bordered linear system; the
// residual is checked against kStationaryTol.
RowVector stationary_distribution(Eigen::Ref<const Matrix> p);

// max |a - b| entrywise; matrices must be the same shape.
double max_abs_diff(Eigen::Ref<const Matrix> a, Eigen::Ref<const Matrix> b);

}  // namespace mk
