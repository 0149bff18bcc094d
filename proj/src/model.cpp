#include "lftident/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "lftident/errors.hpp"

namespace lftident {

using json = nlohmann::json;

bool ParameterDomain::contains(const Vec& theta) const {
  return theta.allFinite() && theta.norm() <= radius * (1.0 + 1e-12);
}

Mat DescriptorModel::p_of(const Vec& theta) const {
  if (theta.size() != static_cast<Index>(P.size()))
    throw InvalidInput("theta has " + std::to_string(theta.size()) + " entries, model has q = " +
                       std::to_string(P.size()));
  Mat out = Mat::Zero(dims.m_v, dims.m_z);
  for (std::size_t k = 0; k < P.size(); ++k) out += theta(static_cast<Index>(k)) * P[k];
  return out;
}

namespace {

void require_shape(const Mat& M, Index r, Index c, const char* name) {
  if (M.rows() != r || M.cols() != c) {
    std::ostringstream os;
    os << name << " is " << M.rows() << "x" << M.cols() << ", expected " << r << "x" << c;
    if (std::string(name) == "E")
      os << " (the descriptor pencil lambda*E - A must be square to be regular)";
    throw ModelShapeError(os.str());
  }
  if (!M.allFinite()) throw ModelNonFiniteError(std::string(name) + " contains NaN or Inf");
}

Mat inverse_solve_checked(const Mat& L, const Mat& rhs, const char* what) {
  if (L.rows() == 0) return rhs;
  Eigen::JacobiSVD<Mat> svd(L);
  const Vec& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * std::max(1.0, s(0)))
    throw WellPosednessViolation(std::string(what) + ": I - P(theta) D_zv is singular");
  return L.partialPivLu().solve(rhs);
}

}  // namespace

ClosedLoop assemble(const DescriptorModel& m, const Vec& theta) {
  const Mat Pt = m.p_of(theta);
  const Mat L = Mat::Identity(m.dims.m_v, m.dims.m_v) - Pt * m.D_zv;
  const Mat X = inverse_solve_checked(L, Pt, "assemble");  // (I - P D_zv)^{-1} P
  ClosedLoop cl;
  cl.A = m.A_xx + m.B_xv * X * m.C_zx;
  cl.B = m.B_xu + m.B_xv * X * m.D_zu;
  cl.C = m.C_yx + m.D_yv * X * m.C_zx;
  cl.D = m.D_yu + m.D_yv * X * m.D_zu;
  return cl;
}

void validate_shapes(const DescriptorModel& m) {
  const Dims& d = m.dims;
  if (d.m_x < 0 || d.m_u < 1 || d.m_y < 1 || d.m_z < 1 || d.m_v < 1 || d.q < 1)
    throw ModelShapeError("dims: m_u, m_y, m_z, m_v, q must be >= 1 and m_x >= 0");
  require_shape(m.E, d.m_x, d.m_x, "E");
  require_shape(m.A_xx, d.m_x, d.m_x, "A_xx");
  require_shape(m.B_xu, d.m_x, d.m_u, "B_xu");
  require_shape(m.B_xv, d.m_x, d.m_v, "B_xv");
  require_shape(m.C_yx, d.m_y, d.m_x, "C_yx");
  require_shape(m.C_zx, d.m_z, d.m_x, "C_zx");
  require_shape(m.D_yu, d.m_y, d.m_u, "D_yu");
  require_shape(m.D_yv, d.m_y, d.m_v, "D_yv");
  require_shape(m.D_zu, d.m_z, d.m_u, "D_zu");
  require_shape(m.D_zv, d.m_z, d.m_v, "D_zv");
  if (static_cast<Index>(m.P.size()) != d.q)
    throw ModelShapeError("P has " + std::to_string(m.P.size()) + " matrices, expected q = " +
                          std::to_string(d.q));
  for (std::size_t k = 0; k < m.P.size(); ++k)
    require_shape(m.P[k], d.m_v, d.m_z, ("P[" + std::to_string(k) + "]").c_str());
  if (!std::isfinite(m.domain.radius) || m.domain.radius <= 0.0)
    throw ModelShapeError("theta_domain.radius must be positive and finite");
}

namespace {

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ModelParseError(std::string("missing key '") + key + "'");
  return *it;
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ModelParseError(where + ": expected a number");
  return v.get<double>();
}

Index dim_value(const json& dims, const char* key) {
  const json& v = field(dims, key);
  if (!v.is_number_integer()) throw ModelParseError(std::string("dims.") + key + " must be an integer");
  return v.get<Index>();
}

Mat read_matrix(const json& v, Index rows, Index cols, const std::string& name) {
  if (!v.is_array()) throw ModelParseError(name + ": expected an array of rows");
  if (static_cast<Index>(v.size()) != rows)
    throw ModelShapeError(name + " has " + std::to_string(v.size()) + " rows, expected " +
                          std::to_string(rows) +
                          (name == "E" ? " (the descriptor pencil must be square)" : ""));
  Mat M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = v[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw ModelParseError(name + ": row " + std::to_string(i) + " is not an array");
    if (static_cast<Index>(row.size()) != cols)
      throw ModelShapeError(name + " row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                            " entries, expected " + std::to_string(cols) +
                            (name == "E" ? " (the descriptor pencil must be square)" : ""));
    for (Index j = 0; j < cols; ++j)
      M(i, j) = number(row[static_cast<std::size_t>(j)], name + "[" + std::to_string(i) + "][" +
                                                             std::to_string(j) + "]");
  }
  return M;
}

}  // namespace

DescriptorModel parse_model(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::out_of_range& e) {
    throw ModelNonFiniteError(std::string("number out of double range: ") + e.what());
  } catch (const json::exception& e) {
    throw ModelParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ModelParseError("top level must be an object");
  DescriptorModel m;
  const json& td = field(j, "time_domain");
  if (!td.is_string()) throw ModelParseError("time_domain must be a string");
  const std::string tds = td.get<std::string>();
  if (tds == "continuous")
    m.time_domain = TimeDomain::Continuous;
  else if (tds == "discrete")
    m.time_domain = TimeDomain::Discrete;
  else
    throw ModelParseError("time_domain must be 'continuous' or 'discrete'");

  const json& dj = field(j, "dims");
  if (!dj.is_object()) throw ModelParseError("dims must be an object");
  Dims& d = m.dims;
  d.m_x = dim_value(dj, "m_x");
  d.m_u = dim_value(dj, "m_u");
  d.m_y = dim_value(dj, "m_y");
  d.m_z = dim_value(dj, "m_z");
  d.m_v = dim_value(dj, "m_v");
  d.q = dim_value(dj, "q");
  if (d.m_x < 0 || d.m_u < 1 || d.m_y < 1 || d.m_z < 1 || d.m_v < 1 || d.q < 1)
    throw ModelShapeError("dims: m_u, m_y, m_z, m_v, q must be >= 1 and m_x >= 0");

  m.E = read_matrix(field(j, "E"), d.m_x, d.m_x, "E");
  m.A_xx = read_matrix(field(j, "A_xx"), d.m_x, d.m_x, "A_xx");
  m.B_xu = read_matrix(field(j, "B_xu"), d.m_x, d.m_u, "B_xu");
  m.B_xv = read_matrix(field(j, "B_xv"), d.m_x, d.m_v, "B_xv");
  m.C_yx = read_matrix(field(j, "C_yx"), d.m_y, d.m_x, "C_yx");
  m.C_zx = read_matrix(field(j, "C_zx"), d.m_z, d.m_x, "C_zx");
  m.D_yu = read_matrix(field(j, "D_yu"), d.m_y, d.m_u, "D_yu");
  m.D_yv = read_matrix(field(j, "D_yv"), d.m_y, d.m_v, "D_yv");
  m.D_zu = read_matrix(field(j, "D_zu"), d.m_z, d.m_u, "D_zu");
  m.D_zv = read_matrix(field(j, "D_zv"), d.m_z, d.m_v, "D_zv");
  const json& pj = field(j, "P");
  if (!pj.is_array()) throw ModelParseError("P must be an array of matrices");
  if (static_cast<Index>(pj.size()) != d.q)
    throw ModelShapeError("P has " + std::to_string(pj.size()) + " matrices, expected q = " +
                          std::to_string(d.q));
  for (std::size_t k = 0; k < pj.size(); ++k)
    m.P.push_back(read_matrix(pj[k], d.m_v, d.m_z, "P[" + std::to_string(k) + "]"));

  auto dom = j.find("theta_domain");
  if (dom != j.end()) {
    if (!dom->is_object()) throw ModelParseError("theta_domain must be an object");
    auto type = dom->find("type");
    if (type != dom->end() && (!type->is_string() || type->get<std::string>() != "ball"))
      throw ModelParseError("theta_domain.type must be 'ball'");
    m.domain.radius = number(field(*dom, "radius"), "theta_domain.radius");
  }
  validate_shapes(m);
  return m;
}

DescriptorModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelParseError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

namespace {

std::string fmt_double(double x) {
  if (x == 0.0) return "0";  // drops the sign of -0
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_matrix(std::ostringstream& os, const Mat& M, const std::string& indent) {
  if (M.rows() == 0) {
    os << "[]";
    return;
  }
  os << "[";
  for (Index i = 0; i < M.rows(); ++i) {
    os << (i ? ",\n" + indent + " " : "") << "[";
    for (Index j = 0; j < M.cols(); ++j) os << (j ? ", " : "") << fmt_double(M(i, j));
    os << "]";
  }
  os << "]";
}

}  // namespace

std::string save_model(const DescriptorModel& m) {
  validate_shapes(m);
  std::ostringstream os;
  const Dims& d = m.dims;
  os << "{\n";
  os << "  \"time_domain\": \""
     << (m.time_domain == TimeDomain::Continuous ? "continuous" : "discrete") << "\",\n";
  os << "  \"dims\": {\"m_x\": " << d.m_x << ", \"m_u\": " << d.m_u << ", \"m_y\": " << d.m_y
     << ", \"m_z\": " << d.m_z << ", \"m_v\": " << d.m_v << ", \"q\": " << d.q << "},\n";
  const std::pair<const char*, const Mat*> blocks[] = {
      {"E", &m.E},       {"A_xx", &m.A_xx}, {"B_xu", &m.B_xu}, {"B_xv", &m.B_xv},
      {"C_yx", &m.C_yx}, {"C_zx", &m.C_zx}, {"D_yu", &m.D_yu}, {"D_yv", &m.D_yv},
      {"D_zu", &m.D_zu}, {"D_zv", &m.D_zv}};
  for (const auto& [name, M] : blocks) {
    const std::string prefix = std::string("  \"") + name + "\": ";
    os << prefix;
    write_matrix(os, *M, std::string(prefix.size(), ' '));
    os << ",\n";
  }
  os << "  \"P\": [";
  for (std::size_t k = 0; k < m.P.size(); ++k) {
    os << (k ? ",\n        " : "");
    write_matrix(os, m.P[k], "        ");
  }
  os << "],\n";
  os << "  \"theta_domain\": {\"type\": \"ball\", \"radius\": " << fmt_double(m.domain.radius)
     << "}\n";
  os << "}\n";
  return os.str();
}

AssumptionReport validate_assumptions(const DescriptorModel& m, const std::vector<Vec>& thetas,
                                      std::uint64_t seed) {
  validate_shapes(m);
  if (thetas.empty()) throw InvalidInput("validate_assumptions: no parameter samples");
  AssumptionReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const Index n = m.dims.m_x;
  for (std::size_t s = 0; s < thetas.size(); ++s) {
    const Vec& th = thetas[s];
    const std::string tag = "sample " + std::to_string(s);
    if (th.size() != m.dims.q) throw InvalidInput(tag + ": theta has wrong length");
    if (!m.domain.contains(th)) throw InvalidInput(tag + ": theta outside the parameter domain");
    AssumptionSample out;
    out.theta = th;
    const Mat L = Mat::Identity(m.dims.m_v, m.dims.m_v) - m.p_of(th) * m.D_zv;
    Eigen::JacobiSVD<Mat> svdL(L);
    const Vec& sl = svdL.singularValues();
    out.well_posedness_cond = sl(sl.size() - 1) > 0 ? sl(0) / sl(sl.size() - 1)
                                                    : std::numeric_limits<double>::infinity();
    if (!(sl(sl.size() - 1) > 1e-12 * std::max(1.0, sl(0))))
      throw WellPosednessViolation(tag + ": I - P(theta) D_zv is singular (cond = " +
                                   fmt_double(out.well_posedness_cond) + ")");
    const ClosedLoop cl = assemble(m, th);
    const double en = m.E.norm();
    const double scale = en > 0 ? std::max(1.0, cl.A.norm() / en) : 1.0;
    out.min_regularity_ratio = std::numeric_limits<double>::infinity();
    double best_ratio = 0.0;
    for (int p = 0; p < 5; ++p) {
      double a = 0.2 + 0.8 * std::abs(unif(rng));
      if (unif(rng) < 0) a = -a;
      const Complex lam = scale * Complex(a, 2.0 * unif(rng));
      const CMat pencil = lam * m.E.cast<Complex>() - cl.A.cast<Complex>();
      const double det = n == 0 ? 1.0 : std::abs(pencil.partialPivLu().determinant());
      double bound = 1.0;
      for (Index c = 0; c < n; ++c) bound *= pencil.col(c).norm();
      const double ratio = bound > 0 ? det / bound : 0.0;
      out.det_magnitudes.push_back(det);
      out.min_regularity_ratio = std::min(out.min_regularity_ratio, ratio);
      best_ratio = std::max(best_ratio, ratio);
    }
    if (!(best_ratio > 1e-13))
      throw RegularityViolation(tag + ": det(lambda E - A(theta)) vanishes at every probe; the "
                                      "pencil is singular");
    rep.worst_cond = std::max(rep.worst_cond, out.well_posedness_cond);
    rep.worst_regularity_ratio = s == 0 ? out.min_regularity_ratio
                                        : std::min(rep.worst_regularity_ratio, out.min_regularity_ratio);
    rep.samples.push_back(std::move(out));
  }
  return rep;
}

DescriptorModel dualize(const DescriptorModel& m) {
  DescriptorModel d;
  d.time_domain = m.time_domain;
  d.dims = {m.dims.m_x, m.dims.m_y, m.dims.m_u, m.dims.m_v, m.dims.m_z, m.dims.q};
  d.E = m.E.transpose();
  d.A_xx = m.A_xx.transpose();
  d.B_xu = m.C_yx.transpose();
  d.C_yx = m.B_xu.transpose();
  d.B_xv = m.C_zx.transpose();
  d.C_zx = m.B_xv.transpose();
  d.D_yu = m.D_yu.transpose();
  d.D_yv = m.D_zu.transpose();
  d.D_zu = m.D_yv.transpose();
  d.D_zv = m.D_zv.transpose();
  for (const Mat& Pk : m.P) d.P.push_back(Pk.transpose());
  d.domain = m.domain;
  return d;
}

}  // namespace lftident
