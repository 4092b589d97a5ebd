#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <vector>

namespace ckm {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

// Dense order-3 complex tensor, mode-1-fastest ("column major") layout:
// element (i, j, k) lives at data[i + n1*j + n1*n2*k].
struct Tensor3C {
  std::array<Index, 3> dims{0, 0, 0};
  std::vector<cplx> data;

  Tensor3C() = default;
  Tensor3C(Index n1, Index n2, Index n3)
      : dims{n1, n2, n3}, data(static_cast<std::size_t>(n1 * n2 * n3), cplx(0, 0)) {}

  Index size() const { return dims[0] * dims[1] * dims[2]; }

  cplx& operator()(Index i, Index j, Index k) {
    return data[static_cast<std::size_t>(i + dims[0] * (j + dims[1] * k))];
  }
  const cplx& operator()(Index i, Index j, Index k) const {
    return data[static_cast<std::size_t>(i + dims[0] * (j + dims[1] * k))];
  }

  // Whole-tensor view as a flat vector (mode-1-fastest order).
  Eigen::Map<const VectorXc> vec() const {
    return Eigen::Map<const VectorXc>(data.data(), size());
  }
  Eigen::Map<VectorXc> vec() { return Eigen::Map<VectorXc>(data.data(), size()); }
};

// Mode-n unfolding; columns are mode-n fibers ordered with the lower
// remaining mode fastest. unfold(t,1) is n1 x (n2*n3), etc.
MatrixXc unfold(const Tensor3C& t, int mode);

// Inverse of unfold for the given full tensor dimensions.
Tensor3C fold(const MatrixXc& m, int mode, const std::array<Index, 3>& dims);

// t x_mode M, i.e. fold(M * unfold(t, mode)). M must have cols == dims[mode-1].
Tensor3C mode_n_product(const Tensor3C& t, const MatrixXc& m, int mode);

double frobenius(const Tensor3C& t);
double frobenius_sq(const Tensor3C& t);

Tensor3C subtract(const Tensor3C& a, const Tensor3C& b);
Tensor3C add(const Tensor3C& a, const Tensor3C& b);
Tensor3C scale(const Tensor3C& t, cplx s);

// Frobenius inner product <a, b> = sum conj(a) .* b.
cplx dot(const Tensor3C& a, const Tensor3C& b);

// Rank-1 tensor a o b o c (outer product).
Tensor3C outer3(const VectorXc& a, const VectorXc& b, const VectorXc& c);

}  // namespace ckm
