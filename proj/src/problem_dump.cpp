#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "macover/array_model.hpp"
#include "macover/convex.hpp"

namespace macover {
namespace {

void write_complex_matrix(std::ostream& os, const Eigen::MatrixXcd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << m(r, c).real() << ' ' << m(r, c).imag();
    }
    os << '\n';
  }
}

void write_real_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << m(r, c);
    }
    os << '\n';
  }
}

void expect(std::istream& is, const std::string& keyword) {
  std::string word;
  if (!(is >> word) || word != keyword)
    throw InvalidArgument("problem dump: expected '" + keyword + "', got '" + word + "'");
}

double read_double(std::istream& is) {
  double v = 0.0;
  if (!(is >> v)) throw InvalidArgument("problem dump: truncated numeric data");
  return v;
}

Eigen::MatrixXcd read_complex_matrix(std::istream& is, int dim) {
  Eigen::MatrixXcd m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      const double re = read_double(is);
      const double im = read_double(is);
      m(r, c) = {re, im};
    }
  return m;
}

}  // namespace

void write_problem(std::ostream& os, const SdpProblem& p) {
  const auto flags = os.flags();
  const auto prec = os.precision(17);
  os << "sdp " << p.dim << ' ' << p.gain_constraints.size() << '\n';
  os << "t_coeff " << p.t_coeff << '\n';
  os << "diag_value " << p.diag_value << '\n';
  if (p.objective.size() == 0) {
    os << "objective none\n";
  } else {
    os << "objective matrix\n";
    write_complex_matrix(os, p.objective);
  }
  for (std::size_t l = 0; l < p.gain_constraints.size(); ++l) {
    os << "gain " << l + 1 << '\n';
    write_complex_matrix(os, p.gain_constraints[l]);
  }
  os.precision(prec);
  os.flags(flags);
}

void write_problem(std::ostream& os, const QcqpProblem& p) {
  const auto flags = os.flags();
  const auto prec = os.precision(17);
  os << "qcqp " << p.dim << ' ' << p.constraints.size() << '\n';
  os << "upper " << p.upper << '\n';
  os << "min_spacing " << p.min_spacing << '\n';
  for (std::size_t l = 0; l < p.constraints.size(); ++l) {
    const auto& q = p.constraints[l];
    os << "constraint " << l + 1 << '\n';
    os << "c " << q.c << '\n';
    os << "b";
    for (Eigen::Index i = 0; i < q.b.size(); ++i) os << ' ' << q.b(i);
    os << '\n';
    write_real_matrix(os, q.a);
  }
  os.precision(prec);
  os.flags(flags);
}

SdpProblem read_sdp_problem(std::istream& is) {
  SdpProblem p;
  std::size_t count = 0;
  expect(is, "sdp");
  is >> p.dim >> count;
  expect(is, "t_coeff");
  p.t_coeff = read_double(is);
  expect(is, "diag_value");
  p.diag_value = read_double(is);
  expect(is, "objective");
  std::string kind;
  is >> kind;
  if (kind == "matrix")
    p.objective = read_complex_matrix(is, p.dim);
  else if (kind != "none")
    throw InvalidArgument("problem dump: bad objective kind '" + kind + "'");
  for (std::size_t l = 0; l < count; ++l) {
    expect(is, "gain");
    std::size_t index = 0;
    is >> index;
    p.gain_constraints.push_back(read_complex_matrix(is, p.dim));
  }
  return p;
}

QcqpProblem read_qcqp_problem(std::istream& is) {
  QcqpProblem p;
  std::size_t count = 0;
  expect(is, "qcqp");
  is >> p.dim >> count;
  expect(is, "upper");
  p.upper = read_double(is);
  expect(is, "min_spacing");
  p.min_spacing = read_double(is);
  for (std::size_t l = 0; l < count; ++l) {
    expect(is, "constraint");
    std::size_t index = 0;
    is >> index;
    QuadraticConstraint q;
    expect(is, "c");
    q.c = read_double(is);
    expect(is, "b");
    q.b.resize(p.dim);
    for (int i = 0; i < p.dim; ++i) q.b(i) = read_double(is);
    q.a.resize(p.dim, p.dim);
    for (int r = 0; r < p.dim; ++r)
      for (int c = 0; c < p.dim; ++c) q.a(r, c) = read_double(is);
    p.constraints.push_back(std::move(q));
  }
  return p;
}

}  // namespace macover
