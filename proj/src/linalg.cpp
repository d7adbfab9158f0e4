#include "macover/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "macover/array_model.hpp"

namespace macover {

HermitianEig hermitian_eig(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("hermitian_eig: matrix not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidArgument("hermitian_eig: matrix not Hermitian");
  // Symmetrize so round-off in the input does not leak into the solver.
  const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SingularPair principal_singular_pair(const Eigen::MatrixXcd& m) {
  SingularPair out;
  if (m.size() == 0) return out;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.sigma = svd.singularValues()(0);
  out.left = svd.matrixU().col(0);
  out.right = svd.matrixV().col(0);
  return out;
}

double max_eigenvalue(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return hermitian_eig(m.cast<std::complex<double>>()).values.maxCoeff();
}

}  // namespace macover
