#include "ckm/cp.hpp"

#include <Eigen/Eigenvalues>
#include <limits>
#include <stdexcept>

#include "ckm/rng.hpp"

namespace ckm {

MatrixXc khatri_rao(const MatrixXc& left, const MatrixXc& right) {
  MatrixXc out(left.rows() * right.rows(), left.cols());
  for (Index r = 0; r < left.cols(); ++r)
    for (Index k = 0; k < left.rows(); ++k)
      out.col(r).segment(k * right.rows(), right.rows()) = left(k, r) * right.col(r);
  return out;
}

namespace {

// Top-r eigenvectors of X X^H (the leading left singular vectors of X).
MatrixXc leading_subspace(const MatrixXc& x, Index r, Rng& rng) {
  MatrixXc gram = x * x.adjoint();
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(gram);
  const Index n = x.rows();
  MatrixXc out(n, r);
  const Index avail = std::min(r, n);
  // SelfAdjointEigenSolver sorts ascending; take from the back.
  for (Index c = 0; c < avail; ++c) out.col(c) = es.eigenvectors().col(n - 1 - c);
  for (Index c = avail; c < r; ++c) {
    VectorXc v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.cnormal();
    out.col(c) = v / v.norm();
  }
  return out;
}

MatrixXc random_unit_columns(Index n, Index r, Rng& rng) {
  MatrixXc m(n, r);
  for (Index c = 0; c < r; ++c) {
    VectorXc v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.cnormal();
    m.col(c) = v / v.norm();
  }
  return m;
}

// Normalize columns in place, replacing numerically dead columns with random
// unit vectors so ALS can escape collapsed components. Returns column norms.
Eigen::VectorXd normalize_columns(MatrixXc& m, Rng& rng) {
  Eigen::VectorXd norms(m.cols());
  for (Index c = 0; c < m.cols(); ++c) {
    const double n = m.col(c).norm();
    norms(c) = n;
    if (n > 0 && std::isfinite(n)) {
      m.col(c) /= n;
    } else {
      VectorXc v(m.rows());
      for (Index i = 0; i < m.rows(); ++i) v(i) = rng.cnormal();
      m.col(c) = v / v.norm();
      norms(c) = 0.0;
    }
  }
  return norms;
}

struct AlsResult {
  MatrixXc A, B, C;
  Eigen::VectorXd weights;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  int sweeps = 0;
  std::vector<double> trace;
};

AlsResult run_als(const MatrixXc& x1, const MatrixXc& x2, const MatrixXc& x3,
                  MatrixXc a, MatrixXc b, MatrixXc c, double norm_t_sq,
                  const CpOptions& opts, Rng& rng, bool record) {
  const double ridge = opts.ridge_rel * norm_t_sq;
  const Index r = a.cols();
  const MatrixXc eye = ridge * MatrixXc::Identity(r, r);
  AlsResult out;
  double prev = std::numeric_limits<double>::infinity();
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(r);

  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    // Each update solves min ||X_(n) - F * Z^T|| with a small ridge; the
    // updated factor absorbs the component weights and is then renormalized.
    {
      MatrixXc z = khatri_rao(c, b);
      MatrixXc gram = ((c.adjoint() * c).cwiseProduct(b.adjoint() * b)).conjugate() + eye;
      MatrixXc rhs = x1 * z.conjugate();
      a = gram.ldlt().solve(rhs.adjoint()).adjoint();
      normalize_columns(a, rng);
    }
    {
      MatrixXc z = khatri_rao(c, a);
      MatrixXc gram = ((c.adjoint() * c).cwiseProduct(a.adjoint() * a)).conjugate() + eye;
      MatrixXc rhs = x2 * z.conjugate();
      b = gram.ldlt().solve(rhs.adjoint()).adjoint();
      normalize_columns(b, rng);
    }
    double res;
    {
      MatrixXc z = khatri_rao(b, a);
      MatrixXc gram = ((b.adjoint() * b).cwiseProduct(a.adjoint() * a)).conjugate() + eye;
      MatrixXc rhs = x3 * z.conjugate();
      c = gram.ldlt().solve(rhs.adjoint()).adjoint();
      res = (x3 - c * z.transpose()).norm();
      weights = normalize_columns(c, rng);
    }
    if (record) out.trace.push_back(res);
    out.sweeps = sweep;
    const double denom = std::max(prev, 1e-300);
    if (std::abs(prev - res) / denom < opts.tol || res <= 1e-14 * std::sqrt(norm_t_sq)) {
      out.converged = true;
      out.residual = res;
      prev = res;
      break;
    }
    prev = res;
  }
  out.residual = prev;
  out.A = std::move(a);
  out.B = std::move(b);
  out.C = std::move(c);
  out.weights = weights;
  return out;
}

}  // namespace

CpFactors best_rank1(const Tensor3C& t, int max_iters, double tol) {
  const double tn = frobenius(t);
  if (tn == 0.0) throw std::invalid_argument("best_rank1: zero tensor");
  const Index n1 = t.dims[0], n2 = t.dims[1], n3 = t.dims[2];
  const MatrixXc x1 = unfold(t, 1), x2 = unfold(t, 2), x3 = unfold(t, 3);
  Rng rng(0xb157ULL);

  VectorXc a = leading_subspace(x1, 1, rng).col(0);
  VectorXc b = leading_subspace(x2, 1, rng).col(0);
  VectorXc c = leading_subspace(x3, 1, rng).col(0);

  auto normalize = [&](VectorXc& v) {
    const double n = v.norm();
    if (n > 0 && std::isfinite(n)) {
      v /= n;
      return true;
    }
    return false;
  };

  cplx g(0, 0);
  double prev_mag = -1.0;
  bool converged = false;
  int iters = 0;
  VectorXc kcb(n2 * n3), kca(n1 * n3), kba(n1 * n2);
  for (int it = 1; it <= max_iters; ++it) {
    iters = it;
    for (Index k = 0; k < n3; ++k)
      kcb.segment(k * n2, n2) = c(k) * b;
    a = x1 * kcb.conjugate();
    if (!normalize(a)) break;
    for (Index k = 0; k < n3; ++k)
      kca.segment(k * n1, n1) = c(k) * a;
    b = x2 * kca.conjugate();
    if (!normalize(b)) break;
    for (Index j = 0; j < n2; ++j)
      kba.segment(j * n1, n1) = b(j) * a;
    c = x3 * kba.conjugate();
    const double cn = c.norm();
    if (!(cn > 0) || !std::isfinite(cn)) break;
    c /= cn;
    // <a o b o c, T> equals the norm of the unnormalized mode-3 update.
    g = cplx(cn, 0.0);
    if (prev_mag >= 0 && std::abs(cn - prev_mag) <= tol * std::max(prev_mag, 1e-300)) {
      converged = true;
      break;
    }
    prev_mag = cn;
  }

  CpFactors f;
  f.rank = 1;
  f.A = a;
  f.B = b;
  f.C = c;
  f.weights = VectorXc::Constant(1, g);
  f.converged = converged;
  f.sweeps = iters;
  return f;
}

CpFactors cp_decompose(const Tensor3C& t, Index rank, const CpOptions& opts) {
  return cp_decompose(t, rank, opts, nullptr);
}

CpFactors cp_decompose(const Tensor3C& t, Index rank, const CpOptions& opts,
                       std::vector<double>* residual_trace) {
  const Index n1 = t.dims[0], n2 = t.dims[1], n3 = t.dims[2];
  if (rank < 1) throw std::invalid_argument("cp_decompose: rank must be >= 1");
  const Index cap = std::min({n2 * n3, n1 * n3, n1 * n2});
  if (rank > cap)
    throw std::invalid_argument("cp_decompose: rank exceeds mode dimension products");
  const double tn_sq = frobenius_sq(t);
  if (tn_sq == 0.0) throw std::invalid_argument("cp_decompose: zero tensor");

  const MatrixXc x1 = unfold(t, 1), x2 = unfold(t, 2), x3 = unfold(t, 3);
  const bool record = opts.record_residuals || residual_trace != nullptr;

  AlsResult best;
  const int starts = 1 + std::max(0, opts.random_restarts);
  for (int s = 0; s < starts; ++s) {
    Rng rng(seed_mix(opts.seed, static_cast<std::uint64_t>(s)));
    MatrixXc a, b, c;
    if (s == 0) {
      a = leading_subspace(x1, rank, rng);
      b = leading_subspace(x2, rank, rng);
      c = leading_subspace(x3, rank, rng);
    } else {
      a = random_unit_columns(n1, rank, rng);
      b = random_unit_columns(n2, rank, rng);
      c = random_unit_columns(n3, rank, rng);
    }
    AlsResult r = run_als(x1, x2, x3, std::move(a), std::move(b), std::move(c), tn_sq,
                          opts, rng, record);
    if (r.residual < best.residual) best = std::move(r);
  }

  if (residual_trace) *residual_trace = best.trace;
  CpFactors f;
  f.rank = rank;
  f.A = std::move(best.A);
  f.B = std::move(best.B);
  f.C = std::move(best.C);
  f.weights = best.weights.cast<cplx>();
  f.converged = best.converged;
  f.sweeps = best.sweeps;
  return f;
}

Tensor3C cp_reconstruct(const CpFactors& f, const std::array<Index, 3>& dims) {
  if (f.A.rows() != dims[0] || f.B.rows() != dims[1] || f.C.rows() != dims[2])
    throw std::invalid_argument("cp_reconstruct: dims mismatch factors");
  MatrixXc z(dims[1] * dims[2], f.rank);
  for (Index r = 0; r < f.rank; ++r)
    for (Index k = 0; k < dims[2]; ++k)
      z.col(r).segment(k * dims[1], dims[1]) = f.C(k, r) * f.B.col(r);
  MatrixXc x1 = f.A * f.weights.asDiagonal() * z.transpose();
  return fold(x1, 1, dims);
}

}  // namespace ckm
