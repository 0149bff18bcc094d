#include "lftident/cli.hpp"

#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lftident/errors.hpp"
#include "lftident/freqplan.hpp"
#include "lftident/oracle.hpp"
#include "lftident/sloppiness.hpp"

namespace lftident::cli {

namespace {

using ojson = nlohmann::ordered_json;

struct Options {
  std::string model_path;
  std::string theta0;
  std::string freqs;
  std::string eps;
  std::string output;
  std::string csv;
  int k = 1;
  std::optional<double> grid_min, grid_max;
  std::size_t grid_points = 200;
  int refine = 0;
  double tol_rank = 1e-10;
  std::uint64_t seed = 11;
  int trials = 200;
  std::optional<double> step;
  bool timing = false;
};

std::vector<double> parse_csv(const std::string& text, const char* what) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw InvalidInput(std::string(what) + ": empty entry");
    const std::string tok = item.substr(b, e - b + 1);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v))
      throw InvalidInput(std::string(what) + ": cannot parse '" + tok + "' as a finite number");
    out.push_back(v);
  }
  return out;
}

RankTolerance rank_tol(const Options& o) {
  RankTolerance t;
  t.relative = o.tol_rank;
  return t;
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size()));
}

Vec theta_or_zero(const Options& o, const DescriptorModel& m) {
  if (o.theta0.empty()) return Vec::Zero(m.dims.q);
  return to_vec(parse_csv(o.theta0, "--theta0"));
}

std::vector<double> require_freqs(const Options& o) {
  if (o.freqs.empty()) throw InvalidInput("--freqs is required for this subcommand");
  return parse_csv(o.freqs, "--freqs");
}

// Numbers with an optional +inf sentinel encoded as the string "inf".
ojson num(double x, bool allow_inf = false) {
  if (allow_inf && std::isinf(x) && x > 0) return "inf";
  return x;
}

ojson array_of(const Vec& v, bool allow_inf = false) {
  ojson a = ojson::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v(i), allow_inf));
  return a;
}

ojson array_of(const std::vector<double>& v, bool allow_inf = false) {
  return array_of(to_vec(v), allow_inf);
}

template <typename T>
ojson int_array(const std::vector<T>& v) {
  ojson a = ojson::array();
  for (const T& x : v) a.push_back(static_cast<long long>(x));
  return a;
}

ojson matrix_columns(const Mat& M) {
  ojson a = ojson::array();
  for (Index c = 0; c < M.cols(); ++c) a.push_back(array_of(Vec(M.col(c))));
  return a;
}

bool all_finite(const ojson& j) {
  if (j.is_number_float()) return std::isfinite(j.get<double>());
  if (j.is_array() || j.is_object()) {
    for (const auto& el : j)
      if (!all_finite(el)) return false;
  }
  return true;
}

std::string fmt_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelParseError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ojson verdict_json(const IdentifiabilityVerdict& v) {
  ojson j;
  j["status"] = to_string(v.status);
  j["reason"] = v.reason;
  j["freqs"] = array_of(v.freqs);
  j["psi_full_column_rank"] = v.psi_fcr;
  j["psi_rank"] = v.psi_rank;
  j["shortcut_frequency"] = v.shortcut_frequency ? ojson(*v.shortcut_frequency) : ojson(nullptr);
  j["side_condition_ok"] = v.side_condition_ok;
  j["rank_trace"] = int_array(v.rank_trace);
  j["residual_dim"] = v.residual_dim;
  j["residual_certified"] = v.residual_certified;
  j["residual_direction"] = v.residual_direction ? array_of(*v.residual_direction) : ojson(nullptr);
  j["certification_freqs"] = array_of(v.certification_freqs);
  return j;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string csv_num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open CSV output '" + path + "'");
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) f << (i ? "," : "") << cells[i];
    f << "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
}

CsvTable trace_table(const std::vector<double>& freqs, const std::vector<Index>& trace) {
  CsvTable t{{"step", "frequency", "kernel_dim"}, {}};
  for (std::size_t i = 0; i < trace.size(); ++i)
    t.rows.push_back({std::to_string(i), i == 0 ? "" : csv_num(freqs[i - 1]), std::to_string(trace[i])});
  return t;
}

ojson run_validate(const Options& o, const DescriptorModel& m, CsvTable& csv) {
  std::vector<Vec> thetas{theta_or_zero(o, m)};
  std::mt19937_64 rng(splitmix64(o.seed));
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int extra = std::min(o.trials, 20);
  for (int t = 0; t < extra; ++t) {
    Vec g(m.dims.q);
    for (Index i = 0; i < g.size(); ++i) g(i) = n01(rng);
    const double r = 0.999 * m.domain.radius * std::pow(u01(rng), 1.0 / static_cast<double>(m.dims.q));
    thetas.push_back(r * g.normalized());
  }
  const AssumptionReport rep = validate_assumptions(m, thetas, o.seed);
  const FnrrReport fn = g_zu_normal_row_rank(m, o.seed, rank_tol(o));
  std::vector<Complex> probes;
  for (int p = 0; p < 3; ++p) probes.push_back(Complex(0.3 + u01(rng), 2.0 * u01(rng) - 1.0));
  double identity_gap = 0.0;
  for (const Vec& th : thetas) identity_gap = std::max(identity_gap, regularity_identity_check(m, th, probes));
  ojson r;
  r["time_domain"] = m.time_domain == TimeDomain::Continuous ? "continuous" : "discrete";
  r["dims"] = {{"m_x", m.dims.m_x}, {"m_u", m.dims.m_u}, {"m_y", m.dims.m_y},
               {"m_z", m.dims.m_z}, {"m_v", m.dims.m_v}, {"q", m.dims.q}};
  r["well_posed"] = true;
  r["regular"] = true;
  r["worst_well_posedness_cond"] = rep.worst_cond;
  r["worst_regularity_ratio"] = rep.worst_regularity_ratio;
  r["determinant_identity_max_rel_gap"] = identity_gap;
  r["g_zu_normal_row_rank"] = fn.normal_row_rank;
  r["g_zu_full_normal_row_rank"] = fn.full && fn.consistent;
  r["sufficient_frequency_count"] = sufficient_count(m);
  ojson samples = ojson::array();
  csv.header = {"sample", "cond", "min_regularity_ratio"};
  for (Index k = 0; k < m.dims.q; ++k) csv.header.push_back("theta_" + std::to_string(k + 1));
  for (std::size_t s = 0; s < rep.samples.size(); ++s) {
    const AssumptionSample& a = rep.samples[s];
    samples.push_back({{"theta", array_of(a.theta)},
                       {"well_posedness_cond", a.well_posedness_cond},
                       {"min_regularity_ratio", a.min_regularity_ratio},
                       {"det_magnitudes", array_of(a.det_magnitudes)}});
    std::vector<std::string> row{std::to_string(s), csv_num(a.well_posedness_cond),
                                 csv_num(a.min_regularity_ratio)};
    for (Index k = 0; k < a.theta.size(); ++k) row.push_back(csv_num(a.theta(k)));
    csv.rows.push_back(row);
  }
  r["samples"] = samples;
  return r;
}

ojson run_ident(const Options& o, const DescriptorModel& m, CsvTable& csv) {
  IdentOptions io;
  io.tol = rank_tol(o);
  io.seed = o.seed;
  const std::vector<double> freqs = require_freqs(o);
  const IdentifiabilityVerdict v = upsilon_test(m, theta_or_zero(o, m), freqs, io);
  csv = trace_table(v.freqs, v.rank_trace);
  ojson r = verdict_json(v);
  r["sufficient_frequency_count"] = sufficient_count(m);
  return r;
}

ojson run_find_freqs(const Options& o, const DescriptorModel& m, CsvTable& csv) {
  SearchOptions so;
  so.tol = rank_tol(o);
  so.seed = o.seed;
  so.refine_rounds = o.refine;
  GridSpec gs;
  gs.omega_min = o.grid_min;
  gs.omega_max = o.grid_max;
  gs.points = o.grid_points;
  const FrequencyPlan p = search_frequencies(m, theta_or_zero(o, m), gs, so);
  csv = trace_table(p.selected, p.rank_trace);
  ojson r;
  r["status"] = to_string(p.status);
  r["selected"] = array_of(p.selected);
  r["rank_trace"] = int_array(p.rank_trace);
  r["residual_dim"] = p.residual_dim;
  r["grid"] = {{"size", p.grid_size}, {"min", p.grid_min}, {"max", p.grid_max}};
  r["refinement_rounds_used"] = p.refinement_rounds_used;
  r["hint"] = p.hint;
  r["sufficient_frequency_count"] = sufficient_count(m);
  r["verification"] = p.verification ? verdict_json(*p.verification) : ojson(nullptr);
  return r;
}

ojson sloppiness_json(const SloppinessReport& s) {
  ojson r;
  r["freqs"] = array_of(s.freqs);
  r["k"] = s.k + 1;
  r["n_s"] = s.n_s;
  r["mu"] = array_of(s.mu, true);
  r["sm_absolute"] = num(s.sm_absolute, true);
  r["sm_relative"] = array_of(s.sm_relative, true);
  r["directions"] = matrix_columns(s.directions);
  return r;
}

ojson run_sloppiness(const Options& o, const DescriptorModel& m, CsvTable& csv) {
  const std::vector<double> freqs = require_freqs(o);
  const RankTolerance tol = rank_tol(o);
  const Index k = o.k - 1;
  if (k < 0 || k >= static_cast<Index>(freqs.size())) throw InvalidInput("--k must lie in 1..N");
  const SloppinessAnalysis a = analyze_sloppiness(m, theta_or_zero(o, m), freqs, k, tol);
  ojson r = sloppiness_json(a.report);
  const std::vector<double> eps = parse_csv(o.eps, "--eps");
  ojson axes = ojson::array();
  for (double e : eps) {
    if (!(e > 0)) throw InvalidInput("--eps entries must be positive");
    ojson semi = ojson::array();
    for (Index i = 0; i < a.report.mu.size(); ++i) semi.push_back(num(e * std::sqrt(a.report.mu(i)), true));
    axes.push_back({{"eps", e}, {"semi_axes", semi}});
  }
  r["ellipsoid"] = axes;
  csv.header = {"index", "mu", "sqrt_mu"};
  for (Index j = 0; j < m.dims.q; ++j) csv.header.push_back("direction_" + std::to_string(j + 1));
  for (Index i = 0; i < a.report.mu.size(); ++i) {
    std::vector<std::string> row{std::to_string(i + 1), csv_num(a.report.mu(i)),
                                 csv_num(std::sqrt(a.report.mu(i)))};
    for (Index j = 0; j < a.report.directions.rows(); ++j) row.push_back(csv_num(a.report.directions(j, i)));
    csv.rows.push_back(row);
  }
  return r;
}

ojson run_oracle(const Options& o, const DescriptorModel& m, CsvTable& csv) {
  const std::vector<double> freqs = require_freqs(o);
  const Vec theta0 = theta_or_zero(o, m);
  const RankTolerance tol = rank_tol(o);
  IdentOptions io;
  io.tol = tol;
  io.seed = o.seed;
  const IdentifiabilityVerdict v = upsilon_test(m, theta0, freqs, io);
  const JacobianEstimate je = fd_jacobian(m, theta0, freqs, o.step);
  const bool local = local_identifiability(je.J);
  ojson r;
  r["verdict"] = verdict_json(v);
  r["jacobian"] = {{"step", je.h},
                   {"halving_rel_change", je.halving_rel_change},
                   {"locally_identifiable", local},
                   {"singular_values", array_of(Vec(Eigen::BDCSVD<Mat>(je.J).singularValues()))}};
  r["agreement"] = {{"identifiable_implies_local", v.status != IdentStatus::Identifiable || local}};
  std::vector<Vec> extra;
  if (v.residual_direction) extra.push_back(*v.residual_direction);
  const EquivalenceProbe pr = random_equivalence_probe(m, theta0, freqs, o.trials, o.seed, 1e-10, extra);
  r["equivalence_probe"] = {
      {"found", pr.theta_star.has_value()},
      {"theta_star", pr.theta_star ? array_of(*pr.theta_star) : ojson(nullptr)},
      {"max_response_diff", std::isfinite(pr.max_response_diff) ? ojson(pr.max_response_diff) : ojson(nullptr)},
      {"candidates_tried", pr.candidates_tried}};
  csv.header = {"index", "mu_structural", "mu_jacobian", "rel_diff"};
  if (v.status == IdentStatus::Identifiable && local) {
    const Index k = std::clamp<Index>(o.k - 1, 0, static_cast<Index>(freqs.size()) - 1);
    const SloppinessAnalysis a = analyze_sloppiness(m, theta0, freqs, k, tol);
    const Vec mu_j = jacobian_sloppiness(je.J);
    ojson rows = ojson::array();
    double worst = 0.0;
    for (Index i = 0; i < std::min(a.report.mu.size(), mu_j.size()); ++i) {
      const double rel = std::abs(a.report.mu(i) - mu_j(i)) / a.report.mu(i);
      worst = std::max(worst, rel);
      rows.push_back({{"mu_structural", a.report.mu(i)}, {"mu_jacobian", mu_j(i)}, {"rel_diff", rel}});
      csv.rows.push_back({std::to_string(i + 1), csv_num(a.report.mu(i)), csv_num(mu_j(i)), csv_num(rel)});
    }
    r["sloppiness_agreement"] = {{"rows", rows}, {"max_rel_diff", worst}};
    std::vector<double> eps = parse_csv(o.eps, "--eps");
    if (eps.empty()) eps = {1e-2, 1e-3, 1e-4};
    ojson stats = ojson::array();
    for (const EllipsoidStats& s : ellipsoid_empirical_check(m, theta0, freqs, eps, 64, o.seed, k, tol))
      stats.push_back({{"eps", s.eps},
                       {"min_ratio", s.min_ratio},
                       {"mean_ratio", s.mean_ratio},
                       {"max_ratio", s.max_ratio},
                       {"samples", s.samples}});
    r["ellipsoid_check"] = stats;
  } else {
    r["sloppiness_agreement"] = nullptr;
    r["ellipsoid_check"] = nullptr;
  }
  return r;
}

void add_common(CLI::App* sc, Options& o) {
  sc->add_option("--model", o.model_path, "Model JSON file")->required();
  sc->add_option("--output", o.output, "Write the JSON report here instead of stdout");
  sc->add_option("--csv", o.csv, "Write a plot-ready CSV companion file");
  sc->add_option("--tol-rank", o.tol_rank, "Relative rank tolerance")->check(CLI::PositiveNumber);
  sc->add_option("--seed", o.seed, "Seed for every randomized step");
  sc->add_flag("--timing", o.timing, "Include wall-clock timing (makes reports non-reproducible)");
}

}  // namespace

namespace {

const char* error_label(int code) {
  switch (code) {
    case kInvalidModel: return "invalid model";
    case kAssumptionViolation: return "assumption violated";
    case kUsage: return "invalid input";
    default: return "numerical inconsistency";
  }
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ModelParseError*>(&e) || dynamic_cast<const ModelShapeError*>(&e) ||
      dynamic_cast<const ModelNonFiniteError*>(&e))
    return kInvalidModel;
  if (dynamic_cast<const AssumptionViolation*>(&e)) return kAssumptionViolation;
  if (dynamic_cast<const InvalidInput*>(&e)) return kUsage;
  return kNumericalInconsistency;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structural identifiability and sloppiness analysis for LFT descriptor models"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "Check shapes, well-posedness and regularity");
  add_common(validate, o);
  validate->add_option("--theta0", o.theta0, "Parameter vector, comma separated (default 0)");
  validate->add_option("--trials", o.trials, "Extra random parameter samples (max 20)")
      ->check(CLI::NonNegativeNumber);

  auto* ident = app.add_subcommand("ident", "Global identifiability test at given frequencies");
  add_common(ident, o);
  ident->add_option("--theta0", o.theta0, "Parameter vector, comma separated (default 0)");
  ident->add_option("--freqs", o.freqs, "Frequencies, comma separated")->required();

  auto* find = app.add_subcommand("find-freqs", "Search a grid for identifying frequencies");
  add_common(find, o);
  find->add_option("--theta0", o.theta0, "Parameter vector, comma separated (default 0)");
  find->add_option("--grid-min", o.grid_min, "Lower grid frequency");
  find->add_option("--grid-max", o.grid_max, "Upper grid frequency");
  find->add_option("--grid-points", o.grid_points, "Grid size")->check(CLI::PositiveNumber);
  find->add_option("--refine", o.refine, "Refinement rounds when the search stalls")
      ->check(CLI::NonNegativeNumber);

  auto* slop = app.add_subcommand("sloppiness", "Sloppiness metrics at given frequencies");
  add_common(slop, o);
  slop->add_option("--theta0", o.theta0, "Parameter vector, comma separated (default 0)");
  slop->add_option("--freqs", o.freqs, "Frequencies, comma separated")->required();
  slop->add_option("--k", o.k, "Frequency index (1-based) used for the parameter map");
  slop->add_option("--eps", o.eps, "Error levels for ellipsoid semi-axes, comma separated");

  auto* orc = app.add_subcommand("oracle", "Cross-check against Jacobian and random probes");
  add_common(orc, o);
  orc->add_option("--theta0", o.theta0, "Parameter vector, comma separated (default 0)");
  orc->add_option("--freqs", o.freqs, "Frequencies, comma separated")->required();
  orc->add_option("--k", o.k, "Frequency index (1-based) used for the parameter map");
  orc->add_option("--eps", o.eps, "Error levels for the ellipsoid check, comma separated");
  orc->add_option("--trials", o.trials, "Random equivalence probe draws")->check(CLI::NonNegativeNumber);
  orc->add_option("--step", o.step, "Finite-difference step")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* sc = app.get_subcommands().front();
  const std::string name = sc->get_name();
  const auto t0 = std::chrono::steady_clock::now();
  ojson report;
  CsvTable csv;
  try {
    const std::string model_text = read_file(o.model_path);
    const DescriptorModel m = parse_model(model_text);
    ojson params;
    params["theta0"] = o.theta0.empty() ? array_of(Vec(Vec::Zero(m.dims.q))) : array_of(theta_or_zero(o, m));
    if (!o.freqs.empty()) params["freqs"] = array_of(parse_csv(o.freqs, "--freqs"));
    params["seed"] = o.seed;
    if (name == "sloppiness" || name == "oracle") params["k"] = o.k;
    if (!o.eps.empty()) params["eps"] = array_of(parse_csv(o.eps, "--eps"));
    if (name == "find-freqs") {
      params["grid_min"] = o.grid_min ? ojson(*o.grid_min) : ojson(nullptr);
      params["grid_max"] = o.grid_max ? ojson(*o.grid_max) : ojson(nullptr);
      params["grid_points"] = o.grid_points;
      params["refine"] = o.refine;
    }
    if (name == "oracle") params["trials"] = o.trials;
    if (name == "validate") params["trials"] = std::min(o.trials, 20);
    if (name == "oracle") params["step"] = o.step ? ojson(*o.step) : ojson(nullptr);
    params["tolerances"] = {{"rank_relative", o.tol_rank},
                            {"pole_guard_relative", kPoleGuard},
                            {"jacobian_rank_relative", 1e-6},
                            {"equivalence_match", 1e-10}};

    report["schema"] = kReportSchema;
    report["tool_version"] = kToolVersion;
    report["subcommand"] = name;
    report["input_digest"] = "fnv1a64:" + fmt_hex(fnv1a64(model_text + "\n" + params.dump()));
    report["parameters"] = params;
    if (name == "validate")
      report["result"] = run_validate(o, m, csv);
    else if (name == "ident")
      report["result"] = run_ident(o, m, csv);
    else if (name == "find-freqs")
      report["result"] = run_find_freqs(o, m, csv);
    else if (name == "sloppiness")
      report["result"] = run_sloppiness(o, m, csv);
    else
      report["result"] = run_oracle(o, m, csv);
  } catch (const std::exception& e) {
    const int code = exit_code_for(e);
    err << "error: " << error_label(code) << ": " << e.what() << "\n";
    return code;
  }

  if (o.timing) {
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    report["timing"] = {{"elapsed_ms", ms}};
  }
  if (!all_finite(report)) {
    err << "error: numerical inconsistency: report contains NaN or Inf\n";
    return kNumericalInconsistency;
  }
  const std::string text = report.dump(2) + "\n";
  try {
    if (o.output.empty()) {
      out << text;
    } else {
      std::ofstream f(o.output, std::ios::binary);
      if (!f) throw InvalidInput("cannot open output '" + o.output + "'");
      f << text;
    }
    if (!o.csv.empty()) write_csv(o.csv, csv);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}

}  // namespace lftident::cli
