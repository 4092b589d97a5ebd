#include "ckm/tensor.hpp"

#include <stdexcept>

namespace ckm {

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) throw std::invalid_argument("tensor mode must be 1, 2 or 3");
}

void check_dims_match(const Tensor3C& a, const Tensor3C& b) {
  if (a.dims != b.dims) throw std::invalid_argument("tensor dimensions mismatch");
}

}  // namespace

MatrixXc unfold(const Tensor3C& t, int mode) {
  check_mode(mode);
  const Index n1 = t.dims[0], n2 = t.dims[1], n3 = t.dims[2];
  if (mode == 1) {
    // Memory layout is already the mode-1 unfolding.
    return Eigen::Map<const MatrixXc>(t.data.data(), n1, n2 * n3);
  }
  if (mode == 2) {
    MatrixXc m(n2, n1 * n3);
    for (Index k = 0; k < n3; ++k)
      for (Index j = 0; j < n2; ++j)
        for (Index i = 0; i < n1; ++i) m(j, i + n1 * k) = t(i, j, k);
    return m;
  }
  // mode 3: transpose of the (n1*n2) x n3 flattening.
  Eigen::Map<const MatrixXc> z(t.data.data(), n1 * n2, n3);
  return z.transpose();
}

Tensor3C fold(const MatrixXc& m, int mode, const std::array<Index, 3>& dims) {
  check_mode(mode);
  const Index n1 = dims[0], n2 = dims[1], n3 = dims[2];
  const Index rows[3] = {n1, n2, n3};
  const Index cols[3] = {n2 * n3, n1 * n3, n1 * n2};
  if (m.rows() != rows[mode - 1] || m.cols() != cols[mode - 1])
    throw std::invalid_argument("fold: matrix shape inconsistent with dims/mode");
  Tensor3C t(n1, n2, n3);
  if (mode == 1) {
    Eigen::Map<MatrixXc>(t.data.data(), n1, n2 * n3) = m;
  } else if (mode == 2) {
    for (Index k = 0; k < n3; ++k)
      for (Index j = 0; j < n2; ++j)
        for (Index i = 0; i < n1; ++i) t(i, j, k) = m(j, i + n1 * k);
  } else {
    Eigen::Map<MatrixXc>(t.data.data(), n1 * n2, n3) = m.transpose();
  }
  return t;
}

Tensor3C mode_n_product(const Tensor3C& t, const MatrixXc& m, int mode) {
  check_mode(mode);
  const Index n1 = t.dims[0], n2 = t.dims[1], n3 = t.dims[2];
  if (m.cols() != t.dims[mode - 1])
    throw std::invalid_argument("mode_n_product: M.cols() must equal dims[mode-1]");
  if (mode == 1) {
    Tensor3C out(m.rows(), n2, n3);
    Eigen::Map<MatrixXc>(out.data.data(), m.rows(), n2 * n3).noalias() =
        m * Eigen::Map<const MatrixXc>(t.data.data(), n1, n2 * n3);
    return out;
  }
  if (mode == 2) {
    Tensor3C out(n1, m.rows(), n3);
    for (Index k = 0; k < n3; ++k) {
      Eigen::Map<const MatrixXc> xk(t.data.data() + n1 * n2 * k, n1, n2);
      Eigen::Map<MatrixXc> yk(out.data.data() + n1 * m.rows() * k, n1, m.rows());
      yk.noalias() = xk * m.transpose();
    }
    return out;
  }
  Tensor3C out(n1, n2, m.rows());
  Eigen::Map<const MatrixXc> z(t.data.data(), n1 * n2, n3);
  Eigen::Map<MatrixXc>(out.data.data(), n1 * n2, m.rows()).noalias() = z * m.transpose();
  return out;
}

double frobenius_sq(const Tensor3C& t) {
  double s = 0.0;
  for (const cplx& v : t.data) s += std::norm(v);
  return s;
}

double frobenius(const Tensor3C& t) { return std::sqrt(frobenius_sq(t)); }

Tensor3C subtract(const Tensor3C& a, const Tensor3C& b) {
  check_dims_match(a, b);
  Tensor3C out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

Tensor3C add(const Tensor3C& a, const Tensor3C& b) {
  check_dims_match(a, b);
  Tensor3C out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

Tensor3C scale(const Tensor3C& t, cplx s) {
  Tensor3C out = t;
  for (cplx& v : out.data) v *= s;
  return out;
}

cplx dot(const Tensor3C& a, const Tensor3C& b) {
  check_dims_match(a, b);
  cplx s(0, 0);
  for (std::size_t i = 0; i < a.data.size(); ++i) s += std::conj(a.data[i]) * b.data[i];
  return s;
}

Tensor3C outer3(const VectorXc& a, const VectorXc& b, const VectorXc& c) {
  Tensor3C t(a.size(), b.size(), c.size());
  for (Index k = 0; k < c.size(); ++k) {
    Eigen::Map<MatrixXc> slab(t.data.data() + a.size() * b.size() * k, a.size(), b.size());
    slab.noalias() = c(k) * a * b.transpose();
  }
  return t;
}

}  // namespace ckm
