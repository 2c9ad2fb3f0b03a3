#include "cpop/sdp_problem.hpp"

#include <algorithm>

#include "cpop/error.hpp"

namespace cpop {

bool SdpProblem::all_real() const {
  return std::none_of(blocks.begin(), blocks.end(), [](const SdpBlock& b) { return b.complex; });
}

Eigen::MatrixXcd SdpProblem::block_value(int b, const Eigen::VectorXd& x) const {
  const SdpBlock& blk = blocks.at(b);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(blk.size, blk.size);
  for (const auto& e : blk.entries) {
    Complex v = e.var < 0 ? e.value : e.value * x[e.var];
    m(e.row, e.col) += v;
    if (e.row != e.col) m(e.col, e.row) += blk.complex ? std::conj(v) : v;
  }
  return m;
}

double SdpProblem::row_value(int r, const Eigen::VectorXd& x) const {
  const SdpRow& row = rows.at(r);
  double v = row.constant;
  for (auto [j, a] : row.coeffs) v += a * x[j];
  return v;
}

double SdpProblem::objective_value(const Eigen::VectorXd& x) const {
  double v = objective_constant;
  for (int j = 0; j < num_vars; ++j) v += objective[j] * x[j];
  return v;
}

SdpProblem hermitian_to_real(const SdpProblem& sdp) {
  SdpProblem out;
  out.num_vars = sdp.num_vars;
  out.objective = sdp.objective;
  out.objective_constant = sdp.objective_constant;
  out.rows = sdp.rows;
  out.var_names = sdp.var_names;
  for (const auto& blk : sdp.blocks) {
    if (!blk.complex) {
      out.blocks.push_back(blk);
      continue;
    }
    SdpBlock rb;
    rb.size = 2 * blk.size;
    rb.complex = false;
    rb.label = blk.label;
    const int s = blk.size;
    for (const auto& e : blk.entries) {
      double re = e.value.real();
      double im = e.value.imag();
      if (e.row == e.col && im != 0.0)
        throw Error(ErrorKind::NonHermitian, "complex coefficient on a diagonal entry");
      if (re != 0.0) {
        rb.entries.push_back({e.row, e.col, e.var, re});
        rb.entries.push_back({e.row + s, e.col + s, e.var, re});
      }
      if (im != 0.0) {
        rb.entries.push_back({e.row, e.col + s, e.var, -im});
        if (e.row != e.col) rb.entries.push_back({e.col, e.row + s, e.var, im});
      }
    }
    out.blocks.push_back(std::move(rb));
  }
  return out;
}

Eigen::MatrixXd embed_hermitian(const Eigen::MatrixXcd& h) {
  const Eigen::Index s = h.rows();
  Eigen::MatrixXd m(2 * s, 2 * s);
  m.topLeftCorner(s, s) = h.real();
  m.bottomRightCorner(s, s) = h.real();
  m.topRightCorner(s, s) = -h.imag();
  m.bottomLeftCorner(s, s) = h.imag();
  return m;
}

Eigen::MatrixXcd gram_from_embedded(const Eigen::MatrixXd& y) {
  const Eigen::Index s = y.rows() / 2;
  Eigen::MatrixXd a = y.topLeftCorner(s, s);
  Eigen::MatrixXd c = y.bottomRightCorner(s, s);
  Eigen::MatrixXd b = y.bottomLeftCorner(s, s);
  Eigen::MatrixXcd g(s, s);
  g.real() = a + c;
  g.imag() = b - b.transpose();
  return g;
}

}  // namespace cpop
