#include "lftident/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lftident/errors.hpp"

namespace lftident {

Vec stacked_response(const DescriptorModel& m, const Vec& theta, const std::vector<double>& freqs) {
  const Index blk = m.dims.m_y * m.dims.m_u;
  Vec out(2 * blk * static_cast<Index>(freqs.size()));
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const CMat H = h_statespace(m, theta, freqs[i]);
    const Index off = 2 * blk * static_cast<Index>(i);
    out.segment(off, blk) = vec<double>(Mat(H.real()));
    out.segment(off + blk, blk) = vec<double>(Mat(H.imag()));
  }
  return out;
}

namespace {

Mat central_difference(const DescriptorModel& m, const Vec& theta0, const std::vector<double>& freqs,
                       double h) {
  Mat J;
  for (Index k = 0; k < theta0.size(); ++k) {
    Vec tp = theta0, tm = theta0;
    tp(k) += h;
    tm(k) -= h;
    const Vec col = (stacked_response(m, tp, freqs) - stacked_response(m, tm, freqs)) / (2.0 * h);
    if (k == 0) J.resize(col.size(), theta0.size());
    J.col(k) = col;
  }
  return J;
}

}  // namespace

JacobianEstimate fd_jacobian(const DescriptorModel& m, const Vec& theta0,
                             const std::vector<double>& freqs, std::optional<double> h) {
  check_theta(m, theta0);
  check_frequencies(m, freqs);
  JacobianEstimate est;
  est.h = h.value_or(1e-5 * std::max(1.0, theta0.lpNorm<Eigen::Infinity>()));
  if (!(est.h > 0)) throw InvalidInput("finite-difference step must be positive");
  est.J = central_difference(m, theta0, freqs, est.h);
  const Mat half = central_difference(m, theta0, freqs, est.h / 2.0);
  est.halving_rel_change = (est.J - half).norm() / std::max(est.J.norm(), 1e-300);
  return est;
}

Mat analytic_jacobian(const DescriptorModel& m, const Vec& theta0, const std::vector<double>& freqs) {
  check_theta(m, theta0);
  check_frequencies(m, freqs);
  const Index blk = m.dims.m_y * m.dims.m_u;
  Mat J(2 * blk * static_cast<Index>(freqs.size()), m.dims.q);
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    const std::vector<CMat> grads = h_gradient(m, theta0, freqs[i]);
    const Index off = 2 * blk * static_cast<Index>(i);
    for (Index k = 0; k < m.dims.q; ++k) {
      const CMat& Gk = grads[static_cast<std::size_t>(k)];
      J.col(k).segment(off, blk) = vec<double>(Mat(Gk.real()));
      J.col(k).segment(off + blk, blk) = vec<double>(Mat(Gk.imag()));
    }
  }
  return J;
}

bool local_identifiability(const Mat& J, double rel_tol) {
  if (J.cols() == 0) return true;
  if (J.rows() < J.cols()) return false;
  const Vec s = Eigen::BDCSVD<Mat>(J).singularValues();
  return s(0) > 0 && s(s.size() - 1) > rel_tol * s(0);
}

Vec jacobian_sloppiness(const Mat& J, double rel_tol) {
  if (!local_identifiability(J, rel_tol))
    throw InfiniteSloppiness("Jacobian is rank deficient: some direction is unconstrained");
  const Vec s = Eigen::BDCSVD<Mat>(J).singularValues();  // descending
  Vec mu(s.size());
  for (Index i = 0; i < s.size(); ++i) mu(i) = 1.0 / (s(s.size() - 1 - i) * s(s.size() - 1 - i));
  return mu;
}

namespace {

double max_response_diff(const DescriptorModel& m, const Vec& theta, const Vec& theta0,
                         const std::vector<double>& freqs) {
  double worst = 0.0;
  for (double w : freqs)
    worst = std::max(worst, (h_statespace(m, theta, w) - h_statespace(m, theta0, w)).norm());
  return worst;
}

// Largest t >= 0 with ||theta0 + t d|| <= R for unit d.
double reach(const Vec& theta0, const Vec& d, double R) {
  const double b = theta0.dot(d), c = theta0.squaredNorm() - R * R;
  const double disc = b * b - c;
  return disc > 0 ? std::max(0.0, -b + std::sqrt(disc)) : 0.0;
}

}  // namespace

EquivalenceProbe random_equivalence_probe(const DescriptorModel& m, const Vec& theta0,
                                          const std::vector<double>& freqs, int trials,
                                          std::uint64_t seed, double match_tol,
                                          const std::vector<Vec>& extra_directions) {
  check_theta(m, theta0);
  check_frequencies(m, freqs);
  double scale = 1.0;
  for (double w : freqs) scale = std::max(scale, h_statespace(m, theta0, w).norm());
  const double R = m.domain.radius;
  const double min_sep = 1e-6 * std::max(1.0, R);
  EquivalenceProbe out;
  out.max_response_diff = std::numeric_limits<double>::infinity();

  auto try_candidate = [&](const Vec& th) {
    if (!m.domain.contains(th) || (th - theta0).norm() < min_sep) return false;
    ++out.candidates_tried;
    double diff;
    try {
      diff = max_response_diff(m, th, theta0, freqs);
    } catch (const Error&) {
      return false;
    }
    out.max_response_diff = std::min(out.max_response_diff, diff);
    if (diff <= match_tol * scale) {
      out.theta_star = th;
      out.max_response_diff = diff;
      return true;
    }
    return false;
  };

  std::vector<Vec> dirs = extra_directions;
  const PsiDecomposition ps = psi(m);
  for (Index c = 0; c < ps.V.cols() - ps.rank; ++c) dirs.push_back(ps.V.col(ps.rank + c));
  const Mat J = fd_jacobian(m, theta0, freqs).J;
  Eigen::BDCSVD<Mat> svd(J, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  for (Index c = 0; c < J.cols(); ++c) {
    const double sc = c < s.size() ? s(c) : 0.0;
    if (!(sc > 1e-6 * (s.size() ? s(0) : 0.0))) dirs.push_back(svd.matrixV().col(c));
  }
  const double fractions[] = {0.9, 0.5, 0.2, 0.05};
  for (const Vec& d0 : dirs) {
    if (d0.size() != theta0.size() || !(d0.norm() > 0)) continue;
    const Vec d = d0.normalized();
    for (double sign : {1.0, -1.0}) {
      const double tmax = reach(theta0, sign * d, R);
      for (double f : fractions)
        if (try_candidate(theta0 + sign * f * tmax * d)) return out;
    }
  }
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(t))));
    std::normal_distribution<double> n01;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    Vec g(theta0.size());
    for (Index i = 0; i < g.size(); ++i) g(i) = n01(rng);
    const double rad = R * std::pow(u01(rng), 1.0 / static_cast<double>(g.size()));
    if (try_candidate(rad * g.normalized())) return out;
  }
  return out;
}

std::vector<EllipsoidStats> ellipsoid_empirical_check(const DescriptorModel& m, const Vec& theta0,
                                                      const std::vector<double>& freqs,
                                                      const std::vector<double>& eps_list, int samples,
                                                      std::uint64_t seed, Index k,
                                                      const RankTolerance& tol) {
  if (samples <= 0) throw InvalidInput("samples must be positive");
  const SMatrices S = s_matrices(gamma_omega(m, theta0, freqs, tol), tol);
  std::vector<CMat> H0;
  for (double w : freqs) H0.push_back(h_statespace(m, theta0, w));
  std::vector<EllipsoidStats> out;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const EllipsoidModel E = frobenius_ellipsoid(S, eps_list[e], k);
    EllipsoidStats st;
    st.eps = eps_list[e];
    st.min_ratio = std::numeric_limits<double>::infinity();
    st.max_ratio = 0.0;
    double sum = 0.0;
    for (int t = 0; t < samples; ++t) {
      std::mt19937_64 rng(splitmix64(seed + 1000003ULL * e + static_cast<std::uint64_t>(t)));
      std::normal_distribution<double> n01;
      Vec u(S.n_s);
      for (Index i = 0; i < u.size(); ++i) u(i) = n01(rng);
      if (!(u.dot(S.M * u) > 0)) continue;
      const Vec theta = theta0 + E.theta_offset(E.boundary_point(u));
      double acc = 0.0;
      for (std::size_t i = 0; i < freqs.size(); ++i)
        acc += (h_statespace(m, theta, freqs[i]) - H0[i]).squaredNorm();
      const double ratio = acc / (st.eps * st.eps);
      st.min_ratio = std::min(st.min_ratio, ratio);
      st.max_ratio = std::max(st.max_ratio, ratio);
      sum += ratio;
      ++st.samples;
    }
    st.mean_ratio = st.samples ? sum / st.samples : 0.0;
    if (!st.samples) st.min_ratio = 0.0;
    out.push_back(st);
  }
  return out;
}

}  // namespace lftident
