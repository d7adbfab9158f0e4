#pragma once

#include <Eigen/Dense>

namespace macover {

struct HermitianEig {
  Eigen::VectorXd values;     // ascending
  Eigen::MatrixXcd vectors;   // orthonormal columns, matching values
};

/// Eigendecomposition of a Hermitian matrix. Throws InvalidArgument if the
/// input is not square or deviates from Hermitian by more than 1e-12 (relative
/// to its largest entry, floored at 1).
HermitianEig hermitian_eig(const Eigen::MatrixXcd& m);

struct SingularPair {
  double sigma = 0.0;
  Eigen::VectorXcd left;
  Eigen::VectorXcd right;
};

/// Largest singular value with unit-norm singular vectors, M v = sigma u.
SingularPair principal_singular_pair(const Eigen::MatrixXcd& m);

/// Largest eigenvalue of a real symmetric matrix, computed through
/// hermitian_eig.
double max_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace macover
