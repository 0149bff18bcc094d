#pragma once

// Dense linear-algebra kernel shared by every other module. All rank decisions
// in the library go through RankTolerance so that a single policy governs them.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lftident {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Threshold on singular values. With `absolute` unset the threshold is
///   relative * max(rows, cols) * max(sigma_max, scale_floor).
/// scale_floor lets callers state the magnitude a product "should" have, so
/// that a product that is numerically zero is not ranked as full.
struct RankTolerance {
  double relative = 1e-10;
  double scale_floor = 0.0;
  std::optional<double> absolute;

  double threshold(Index rows, Index cols, double sigma_max) const;
  RankTolerance with_floor(double floor) const;
};

struct RankDecision {
  Index rank = 0;
  double tol = 0.0;
  Vec singular_values;  // descending
  // Smallest retained and largest discarded singular value (0 when absent).
  double sigma_kept() const;
  double sigma_dropped() const;
};

template <typename Scalar>
struct SvdFactors {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix U1, U2, V1, V2;  // range / complement bases
  Vec sigma;              // all min(m, n) singular values, descending
  Index rank = 0;
  double tol = 0.0;
};

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Full SVD with rank-split factors. Empty matrices are handled: an m x 0
/// matrix has U2 = I_m, a 0 x n matrix has V2 = I_n.
template <typename Scalar>
SvdFactors<Scalar> svd_full(const MatrixT<Scalar>& A, const RankTolerance& tol = {});

template <typename Scalar>
RankDecision rank_decision(const MatrixT<Scalar>& A, const RankTolerance& tol = {});

/// Full column rank; a matrix with zero columns is FCR.
template <typename Scalar>
bool is_fcr(const MatrixT<Scalar>& A, const RankTolerance& tol = {});

/// Orthonormal columns N with A N = 0.
template <typename Scalar>
MatrixT<Scalar> right_null_basis(const MatrixT<Scalar>& A, const RankTolerance& tol = {});

/// Orthonormal rows N with N A = 0.
template <typename Scalar>
MatrixT<Scalar> left_null_basis(const MatrixT<Scalar>& A, const RankTolerance& tol = {});

/// Orthonormal columns spanning range(A).
template <typename Scalar>
MatrixT<Scalar> range_basis(const MatrixT<Scalar>& A, const RankTolerance& tol = {});

template <typename Scalar>
MatrixT<Scalar> pinv(const MatrixT<Scalar>& A, const RankTolerance& tol = {});

template <typename Scalar>
struct SolveResult {
  bool solvable = false;
  std::optional<MatrixT<Scalar>> X;
  double residual = 0.0;  // ||A X B - C||_F / max(1, ||C||_F)
};

/// Decides solvability of A X B = C via the pseudo-inverse residual test and
/// returns the minimum-norm solution when it exists.
template <typename Scalar>
SolveResult<Scalar> solvable_axb(const MatrixT<Scalar>& A, const MatrixT<Scalar>& B,
                                 const MatrixT<Scalar>& C, const RankTolerance& tol = {},
                                 double residual_tol = 1e-9);

/// Generalized eigenproblem S x = mu M x for symmetric PSD S, M. Directions in
/// ker(S) ∩ ker(M) are discarded; directions in ker(M) \ ker(S) get mu = +inf.
/// Eigenvalues are returned in descending order with M-normalized eigenvectors
/// (vectors for infinite eigenvalues are unit-normalized).
struct PencilEigen {
  Vec values;
  Mat vectors;
};
PencilEigen gen_eig_psd_pencil(const Mat& S, const Mat& M, const RankTolerance& tol = {});

/// sin of the largest principal angle between range(A) and range(B); both are
/// assumed to have orthonormal columns of the same count.
double subspace_distance(const Mat& A, const Mat& B);

template <typename Scalar>
MatrixT<Scalar> kron(const MatrixT<Scalar>& A, const MatrixT<Scalar>& B);

/// Column-major vectorization and its inverse.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> vec(const MatrixT<Scalar>& A);
template <typename Scalar>
MatrixT<Scalar> unvec(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v, Index rows, Index cols);

/// [Re A, -Im A; Im A, Re A].
Mat realify(const CMat& A);

/// Incremental full-column-rank test of a stack [A_1; A_2; ...]: the running
/// basis Z spans the common kernel of all blocks seen so far.
class NullChain {
 public:
  explicit NullChain(Index n);
  // Starts the chain from a given orthonormal basis instead of I_n.
  explicit NullChain(Mat start);

  // Restricts Z to ker(block); returns the new kernel dimension.
  Index add(const Mat& block, const RankTolerance& tol = RankTolerance{}.with_floor(1.0));
  const Mat& basis() const { return Z_; }
  Index dim() const { return Z_.cols(); }
  const std::vector<Index>& trace() const { return trace_; }

 private:
  Mat Z_;
  std::vector<Index> trace_;
};

/// 64-bit FNV-1a; used for report input digests.
std::uint64_t fnv1a64(const std::string& data);

/// SplitMix64 step; derives independent per-trial seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace lftident
