#include "lftident/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lftident/errors.hpp"

namespace lftident {

double RankTolerance::threshold(Index rows, Index cols, double sigma_max) const {
  if (absolute) return *absolute;
  return relative * static_cast<double>(std::max<Index>(std::max(rows, cols), 1)) *
         std::max(sigma_max, scale_floor);
}

RankTolerance RankTolerance::with_floor(double floor) const {
  RankTolerance out = *this;
  out.scale_floor = floor;
  return out;
}

double RankDecision::sigma_kept() const {
  return rank > 0 ? singular_values(rank - 1) : 0.0;
}

double RankDecision::sigma_dropped() const {
  return rank < singular_values.size() ? singular_values(rank) : 0.0;
}

namespace {

template <typename Scalar>
Index count_rank(const Vec& sigma, double tol) {
  Index r = 0;
  while (r < sigma.size() && sigma(r) > tol) ++r;
  return r;
}

}  // namespace

template <typename Scalar>
SvdFactors<Scalar> svd_full(const MatrixT<Scalar>& A, const RankTolerance& tol) {
  using M = MatrixT<Scalar>;
  const Index m = A.rows(), n = A.cols();
  SvdFactors<Scalar> f;
  if (!A.allFinite()) throw InvalidInput("svd_full: non-finite input");
  if (m == 0 || n == 0) {
    f.sigma = Vec(0);
    f.rank = 0;
    f.tol = tol.threshold(m, n, 0.0);
    f.U1 = M(m, 0);
    f.U2 = M::Identity(m, m);
    f.V1 = M(n, 0);
    f.V2 = M::Identity(n, n);
    return f;
  }
  Eigen::BDCSVD<M> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  f.sigma = svd.singularValues();
  f.tol = tol.threshold(m, n, f.sigma(0));
  f.rank = count_rank<Scalar>(f.sigma, f.tol);
  const M& U = svd.matrixU();
  const M& V = svd.matrixV();
  f.U1 = U.leftCols(f.rank);
  f.U2 = U.rightCols(m - f.rank);
  f.V1 = V.leftCols(f.rank);
  f.V2 = V.rightCols(n - f.rank);
  return f;
}

template <typename Scalar>
RankDecision rank_decision(const MatrixT<Scalar>& A, const RankTolerance& tol) {
  RankDecision d;
  if (!A.allFinite()) throw InvalidInput("rank_decision: non-finite input");
  if (A.rows() == 0 || A.cols() == 0) {
    d.singular_values = Vec(0);
    d.tol = tol.threshold(A.rows(), A.cols(), 0.0);
    return d;
  }
  Eigen::BDCSVD<MatrixT<Scalar>> svd(A);
  d.singular_values = svd.singularValues();
  d.tol = tol.threshold(A.rows(), A.cols(), d.singular_values(0));
  d.rank = count_rank<Scalar>(d.singular_values, d.tol);
  return d;
}

template <typename Scalar>
bool is_fcr(const MatrixT<Scalar>& A, const RankTolerance& tol) {
  if (A.cols() == 0) return true;
  return rank_decision<Scalar>(A, tol).rank == A.cols();
}

template <typename Scalar>
MatrixT<Scalar> right_null_basis(const MatrixT<Scalar>& A, const RankTolerance& tol) {
  return svd_full<Scalar>(A, tol).V2;
}

template <typename Scalar>
MatrixT<Scalar> left_null_basis(const MatrixT<Scalar>& A, const RankTolerance& tol) {
  return svd_full<Scalar>(A, tol).U2.adjoint();
}

template <typename Scalar>
MatrixT<Scalar> range_basis(const MatrixT<Scalar>& A, const RankTolerance& tol) {
  if (!A.allFinite()) throw InvalidInput("range_basis: non-finite input");
  if (A.rows() == 0 || A.cols() == 0) return MatrixT<Scalar>(A.rows(), 0);
  Eigen::BDCSVD<MatrixT<Scalar>> svd(A, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  const Index r = count_rank<Scalar>(s, tol.threshold(A.rows(), A.cols(), s(0)));
  return svd.matrixU().leftCols(r);
}

template <typename Scalar>
MatrixT<Scalar> pinv(const MatrixT<Scalar>& A, const RankTolerance& tol) {
  const Index m = A.rows(), n = A.cols();
  if (m == 0 || n == 0) return MatrixT<Scalar>::Zero(n, m);
  Eigen::BDCSVD<MatrixT<Scalar>> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& s = svd.singularValues();
  const Index r = count_rank<Scalar>(s, tol.threshold(m, n, s(0)));
  MatrixT<Scalar> V = svd.matrixV().leftCols(r);
  for (Index i = 0; i < r; ++i) V.col(i) /= s(i);
  return V * svd.matrixU().leftCols(r).adjoint();
}

template <typename Scalar>
SolveResult<Scalar> solvable_axb(const MatrixT<Scalar>& A, const MatrixT<Scalar>& B,
                                 const MatrixT<Scalar>& C, const RankTolerance& tol,
                                 double residual_tol) {
  if (A.rows() != C.rows() || B.cols() != C.cols())
    throw InvalidInput("solvable_axb: incompatible shapes");
  SolveResult<Scalar> out;
  MatrixT<Scalar> X = pinv<Scalar>(A, tol) * C * pinv<Scalar>(B, tol);
  const double scale = std::max(1.0, C.norm());
  out.residual = (A * X * B - C).norm() / scale;
  out.solvable = out.residual <= residual_tol;
  if (out.solvable) out.X = std::move(X);
  return out;
}

PencilEigen gen_eig_psd_pencil(const Mat& S, const Mat& M, const RankTolerance& tol) {
  if (S.rows() != S.cols() || M.rows() != M.cols() || S.rows() != M.rows())
    throw InvalidInput("gen_eig_psd_pencil: S and M must be square and equal-sized");
  const Index n = S.rows();
  PencilEigen out;
  if (n == 0) {
    out.values = Vec(0);
    out.vectors = Mat(0, 0);
    return out;
  }
  const Mat Ss = 0.5 * (S + S.transpose());
  const Mat Ms = 0.5 * (M + M.transpose());
  // Restrict to range(S + M), whiten it, and solve S y = tau (S + M) y with
  // tau in [0, 1]; then mu = tau / (1 - tau).
  Eigen::SelfAdjointEigenSolver<Mat> es(Ss + Ms);
  const Vec& d = es.eigenvalues();  // ascending
  const double dmax = std::max(d.maxCoeff(), 0.0);
  const double thr = tol.threshold(n, n, dmax);
  std::vector<Index> keep;
  for (Index i = 0; i < n; ++i)
    if (d(i) > thr) keep.push_back(i);
  const Index r = static_cast<Index>(keep.size());
  Mat X(n, r);
  for (Index i = 0; i < r; ++i) X.col(i) = es.eigenvectors().col(keep[i]) / std::sqrt(d(keep[i]));
  Mat Sw = X.transpose() * Ss * X;
  Sw = 0.5 * (Sw + Sw.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> ew(Sw);
  const Vec& tau = ew.eigenvalues();
  const Mat Y = X * ew.eigenvectors();
  out.values.resize(r);
  out.vectors.resize(n, r);
  // Descending mu corresponds to descending tau.
  for (Index i = 0; i < r; ++i) {
    const Index src = r - 1 - i;
    const double t = std::clamp(tau(src), 0.0, 1.0);
    const double one_minus = 1.0 - t;
    Vec x = Y.col(src);
    if (one_minus <= 1e-13) {
      out.values(i) = std::numeric_limits<double>::infinity();
      x.normalize();
    } else {
      out.values(i) = t / one_minus;
      x /= std::sqrt(one_minus);  // x' M x = 1
    }
    out.vectors.col(i) = x;
  }
  return out;
}

double subspace_distance(const Mat& A, const Mat& B) {
  if (A.cols() != B.cols() || A.rows() != B.rows())
    throw InvalidInput("subspace_distance: bases must have equal shape");
  if (A.cols() == 0) return 0.0;
  const Mat R = B - A * (A.transpose() * B);
  Eigen::BDCSVD<Mat> svd(R);
  return svd.singularValues()(0);
}

template <typename Scalar>
MatrixT<Scalar> kron(const MatrixT<Scalar>& A, const MatrixT<Scalar>& B) {
  MatrixT<Scalar> K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vec(const MatrixT<Scalar>& A) {
  return Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>(A.data(), A.size());
}

template <typename Scalar>
MatrixT<Scalar> unvec(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw InvalidInput("unvec: size mismatch");
  return Eigen::Map<const MatrixT<Scalar>>(v.data(), rows, cols);
}

Mat realify(const CMat& A) {
  const Index m = A.rows(), n = A.cols();
  Mat R(2 * m, 2 * n);
  R.topLeftCorner(m, n) = A.real();
  R.topRightCorner(m, n) = -A.imag();
  R.bottomLeftCorner(m, n) = A.imag();
  R.bottomRightCorner(m, n) = A.real();
  return R;
}

NullChain::NullChain(Index n) : Z_(Mat::Identity(n, n)) {}

NullChain::NullChain(Mat start) : Z_(std::move(start)) {}

Index NullChain::add(const Mat& block, const RankTolerance& tol) {
  if (block.cols() != Z_.rows()) throw InvalidInput("NullChain::add: column mismatch");
  if (Z_.cols() > 0) {
    const Mat W = right_null_basis<double>(block * Z_, tol);
    Z_ = Z_ * W;
  }
  trace_.push_back(Z_.cols());
  return Z_.cols();
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

#define LFTIDENT_INSTANTIATE(S)                                                                   \
  template SvdFactors<S> svd_full<S>(const MatrixT<S>&, const RankTolerance&);                    \
  template RankDecision rank_decision<S>(const MatrixT<S>&, const RankTolerance&);                \
  template bool is_fcr<S>(const MatrixT<S>&, const RankTolerance&);                               \
  template MatrixT<S> right_null_basis<S>(const MatrixT<S>&, const RankTolerance&);               \
  template MatrixT<S> left_null_basis<S>(const MatrixT<S>&, const RankTolerance&);                \
  template MatrixT<S> range_basis<S>(const MatrixT<S>&, const RankTolerance&);                    \
  template MatrixT<S> pinv<S>(const MatrixT<S>&, const RankTolerance&);                           \
  template SolveResult<S> solvable_axb<S>(const MatrixT<S>&, const MatrixT<S>&,                   \
                                          const MatrixT<S>&, const RankTolerance&, double);       \
  template MatrixT<S> kron<S>(const MatrixT<S>&, const MatrixT<S>&);                              \
  template Eigen::Matrix<S, Eigen::Dynamic, 1> vec<S>(const MatrixT<S>&);                         \
  template MatrixT<S> unvec<S>(const Eigen::Matrix<S, Eigen::Dynamic, 1>&, Index, Index);

LFTIDENT_INSTANTIATE(double)
LFTIDENT_INSTANTIATE(Complex)

#undef LFTIDENT_INSTANTIATE

}  // namespace lftident
