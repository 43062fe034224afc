#include "bwbary/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "bwbary/counterexample.hpp"
#include "bwbary/geometry.hpp"
#include "bwbary/matrix_io.hpp"

namespace bwbary::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr Index kMaxDefaultRankDim = 64;

std::string sci3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> path_strings(const std::vector<fs::path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

// Collects a RunReport. Everything except "timing" is a function of the
// inputs, so two identical runs serialize identically apart from that member.
class RunReport {
 public:
  RunReport(std::string name, json args)
      : start_(std::chrono::steady_clock::now()) {
    report_["command"] = {{"name", std::move(name)}, {"args", std::move(args)}};
    report_["inputs"] = json::object();
    report_["outputs"] = json::object();
    report_["results"] = json::object();
    report_["seed"] = nullptr;
  }

  void input(const fs::path& path) { report_["inputs"][path.string()] = file_digest(path); }
  void output(const fs::path& path) { report_["outputs"][path.string()] = file_digest(path); }
  void seed(std::uint64_t s) { report_["seed"] = s; }
  json& results() { return report_["results"]; }

  int emit(std::ostream& out, ReportFormat format, const std::string& text, int code) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    report_["exit_code"] = code;
    report_["timing"] = {{"wall_clock_seconds", elapsed}};
    check_finite(report_["results"]);
    if (format == ReportFormat::Json) {
      out << report_.dump(2) << "\n";
    } else {
      out << text;
    }
    return code;
  }

 private:
  static void check_finite(const json& j) {
    if (j.is_number_float() && !std::isfinite(j.get<double>())) {
      throw Error(ErrorKind::NonFinite, "report contains a non-finite value");
    }
    if (j.is_structured()) {
      for (const auto& v : j) check_finite(v);
    }
  }

  std::chrono::steady_clock::time_point start_;
  json report_;
};

std::vector<CovMatrix> load_inputs(const std::vector<fs::path>& paths, RunReport& report) {
  if (paths.empty()) throw Error(ErrorKind::InvalidInput, "no input covariance files given");
  std::vector<CovMatrix> inputs;
  for (const auto& p : paths) {
    inputs.push_back(load_covariance(p));
    report.input(p);
  }
  return inputs;
}

void write_history_csv(const fs::path& path, const BarycentreResult& result) {
  std::ostringstream csv;
  csv << "iteration,change,frechet,ridge\n";
  for (const auto& r : result.history) {
    csv << r.iteration << "," << full(r.change) << "," << full(r.frechet) << "," << full(r.ridge) << "\n";
  }
  write_text_file(path, csv.str());
}

json solver_json(const BarycentreResult& r) {
  return {{"iterations", r.iterations},
          {"final_change", r.final_change},
          {"certificate_residual", r.certificate_residual},
          {"converged", r.converged},
          {"monotonicity_violations", r.monotonicity_violations}};
}

double min_eigenvalue(const SymMap& m) { return eig_sym(m).eigenvalues(m.dim() - 1); }

}  // namespace

double resolve_rank_tol(const std::optional<double>& explicit_tol, Index max_dim) {
  std::optional<double> tol = explicit_tol;
  if (!tol) {
    if (const char* env = std::getenv("BW_RANK_TOL"); env && *env) {
      char* end = nullptr;
      const double v = std::strtod(env, &end);
      if (end == env || *end != '\0') throw Error(ErrorKind::InvalidInput, "BW_RANK_TOL is not a number");
      tol = v;
    }
  }
  if (tol) {
    if (!(*tol > 0.0) || !std::isfinite(*tol)) throw Error(ErrorKind::InvalidInput, "rank tolerance must be > 0");
    return *tol;
  }
  if (max_dim > kMaxDefaultRankDim) {
    throw Error(ErrorKind::InvalidInput,
                "dimension " + std::to_string(max_dim) +
                    " > 64 needs an explicit --rank-tol (or BW_RANK_TOL)");
  }
  return kRankTol;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFinite: return kNumericalFailure;
    default: return kInvalidInput;
  }
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidInput;
  }
}

json strip_timing(json report) {
  report.erase("timing");
  return report;
}

int cmd_construct(const ConstructOptions& opt, const CommonOptions& common, std::ostream& out) {
  const int modes = (opt.pair ? 1 : 0) + (opt.c ? 1 : 0) + (opt.law ? 1 : 0);
  if (modes > 1) throw Error(ErrorKind::InvalidInput, "choose one of --pair, --c, --law");
  const bool pair = opt.pair || modes == 0;

  json args = {{"dim", opt.dim}, {"decay", opt.decay}, {"out", opt.out.string()}};
  if (pair) args["pair"] = true;
  if (opt.c) args["c"] = *opt.c;
  if (opt.law) args["law"] = *opt.law;
  RunReport report("construct", args);

  const double rank_tol = resolve_rank_tol(common.rank_tol, opt.dim);
  const TruncationConfig config{opt.dim, parse_decay(opt.decay), {}};
  const CovMatrix sigma = build_sigma(config);

  std::vector<std::pair<std::string, SymMap>> maps;
  if (pair) {
    auto [t1, t2] = build_pair_maps(opt.dim);
    maps.emplace_back("1", std::move(t1));
    maps.emplace_back("2", std::move(t2));
  } else if (opt.c) {
    maps.emplace_back("", build_T(opt.dim, *opt.c));
  } else {
    report.seed(opt.seed);
    maps.emplace_back("", random_map_sample(RandomMapLaw::parse(*opt.law), opt.seed, opt.dim));
  }

  std::ostringstream text;
  const fs::path sigma_path = opt.out / "sigma.json";
  save_matrix(sigma_path, sigma);
  report.output(sigma_path);
  auto& res = report.results();
  res["sigma"] = {{"kernel_dim", kernel_dim(sigma, rank_tol)}, {"trace", sigma.trace()}};
  res["rank_tol"] = rank_tol;
  text << "sigma: dim " << opt.dim << ", kernel dim " << kernel_dim(sigma, rank_tol) << ", trace "
       << full(sigma.trace()) << "\n";

  for (const auto& [suffix, t] : maps) {
    const CovMatrix s = conjugate(t, sigma);
    const fs::path t_path = opt.out / ("t" + suffix + ".json");
    const fs::path s_path = opt.out / ("s" + suffix + ".json");
    save_matrix(t_path, t);
    save_matrix(s_path, s);
    report.output(t_path);
    report.output(s_path);
    const Index kd = kernel_dim(s, rank_tol);
    res["t" + suffix] = {{"min_eigenvalue", min_eigenvalue(t)}, {"operator_norm", operator_norm(t)}};
    res["s" + suffix] = {{"kernel_dim", kd}, {"trace", s.trace()}};
    text << "s" << suffix << ": kernel dim " << kd << ", trace " << full(s.trace()) << "\n";
  }
  return report.emit(out, common.report, text.str(), kOk);
}

int cmd_verify(const VerifyOptions& opt, const CommonOptions& common, std::ostream& out) {
  RunReport report("verify", {{"candidate", opt.candidate.string()},
                              {"inputs", path_strings(opt.inputs)},
                              {"weights", opt.weights},
                              {"tol", opt.tol}});
  if (!(opt.tol > 0.0)) throw Error(ErrorKind::InvalidInput, "--tol must be > 0");
  const CovMatrix candidate = load_covariance(opt.candidate);
  report.input(opt.candidate);
  const BarycentreProblem problem(load_inputs(opt.inputs, report), opt.weights);

  const double residual = verify_barycentre_certificate(candidate, problem);
  const bool pass = residual <= opt.tol;
  report.results()["certificate_residual"] = residual;
  report.results()["pass"] = pass;

  std::ostringstream text;
  text << "certificate residual " << sci3(residual) << " (tol " << sci3(opt.tol) << ") "
       << (pass ? "PASS" : "FAIL") << "\n";
  return report.emit(out, common.report, text.str(), pass ? kOk : kToleranceFailure);
}

int cmd_barycentre(const BarycentreOptions& opt, const CommonOptions& common, std::ostream& out) {
  const fs::path history = opt.history ? *opt.history : fs::path(opt.out.string() + ".history.csv");
  json args = {{"inputs", path_strings(opt.inputs)}, {"weights", opt.weights},
               {"tol", opt.tol},         {"max_iter", opt.max_iter},
               {"ridge", opt.ridge},     {"ridge_decay", opt.ridge_decay},
               {"out", opt.out.string()}, {"history", history.string()}};
  if (opt.init) args["init"] = opt.init->string();
  RunReport report("barycentre", args);

  const SolverSettings settings{opt.tol, opt.max_iter, opt.ridge, opt.ridge_decay};
  const BarycentreProblem problem(load_inputs(opt.inputs, report), opt.weights, settings);
  std::optional<CovMatrix> init;
  if (opt.init) {
    init = load_covariance(*opt.init);
    report.input(*opt.init);
  }

  const BarycentreResult result = barycentre_fixed_point(problem, init);
  save_matrix(opt.out, result.barycentre);
  write_history_csv(history, result);
  report.output(opt.out);
  report.output(history);
  report.results() = solver_json(result);
  report.results()["frechet"] = result.history.empty() ? 0.0 : result.history.back().frechet;

  std::ostringstream text;
  text << (result.converged ? "converged" : "not converged") << " after " << result.iterations
       << " iterations, change " << sci3(result.final_change) << ", certificate residual "
       << sci3(result.certificate_residual) << "\n";
  if (result.monotonicity_violations > 0) {
    text << "warning: Frechet value increased in " << result.monotonicity_violations << " iterations\n";
  }
  return report.emit(out, common.report, text.str(), result.converged ? kOk : kToleranceFailure);
}

int cmd_recurrence(const RecurrenceOptions& opt, const CommonOptions& common, std::ostream& out) {
  RunReport report("recurrence", {{"y0", opt.y0},
                                  {"y1", opt.y1},
                                  {"sign", opt.sign},
                                  {"steps", opt.steps},
                                  {"out", opt.out.string()}});
  if (opt.steps < 2 || opt.steps > 60) throw Error(ErrorKind::InvalidInput, "--steps must lie in 2..60");
  const RecurrenceParams params{opt.y0, opt.y1, parse_sign(opt.sign), opt.steps};
  const auto iterated = kernel_recurrence_solve(params);
  const auto closed = generating_coefficients(params);
  const auto form = closed_form_coefficients(params);
  const auto witness = growth_witness(params);

  std::ostringstream csv;
  csv << "j,recurrence,closed_form,abs_diff\n";
  double max_diff = 0.0;
  for (std::size_t j = 0; j < iterated.size(); ++j) {
    const double diff = std::abs(iterated[j] - closed[j]);
    max_diff = std::max(max_diff, diff);
    csv << j << "," << full(iterated[j]) << "," << full(closed[j]) << "," << full(diff) << "\n";
  }
  const bool pass = max_diff <= 1e-9;

  std::ostringstream text;
  if (opt.out == "-") {
    text << csv.str();
  } else {
    write_text_file(opt.out, csv.str());
    report.output(opt.out);
  }
  const char* kind = witness.kind == GrowthKind::Zero      ? "zero"
                     : witness.kind == GrowthKind::Bounded ? "bounded"
                                                           : "linear";
  auto& res = report.results();
  res["a"] = form.a;
  res["b"] = form.b;
  res["max_abs_diff"] = max_diff;
  res["growth"] = {{"kind", kind}, {"j0", witness.j0}, {"slope", witness.slope}, {"verified", witness.verified}};
  res["pass"] = pass;
  text << "a = " << full(form.a) << ", b = " << full(form.b) << ", max |recurrence - closed form| = "
       << sci3(max_diff) << " " << (pass ? "PASS" : "FAIL") << "\n";
  text << "growth: " << kind << ", j0 = " << witness.j0 << ", slope " << full(witness.slope)
       << (witness.verified ? " (verified)" : " (not verified)") << "\n";
  return report.emit(out, common.report, text.str(), pass ? kOk : kToleranceFailure);
}

int cmd_mc(const McOptions& opt, const CommonOptions& common, std::ostream& out) {
  RunReport report("mc", {{"dim", opt.dim},
                          {"decay", opt.decay},
                          {"law", opt.law},
                          {"n", opt.n},
                          {"tol", opt.tol},
                          {"max_iter", opt.max_iter},
                          {"ridge", opt.ridge},
                          {"ridge_decay", opt.ridge_decay}});
  report.seed(opt.seed);
  if (opt.n < 2) throw Error(ErrorKind::NInsufficient, "--n must be >= 2");
  const TruncationConfig config{opt.dim, parse_decay(opt.decay), {}};
  const SolverSettings settings{opt.tol, opt.max_iter, opt.ridge, opt.ridge_decay};
  const auto r = population_mc_experiment(config, RandomMapLaw::parse(opt.law),
                                          static_cast<std::size_t>(opt.n), opt.seed, settings);
  auto& res = report.results();
  res["certificate_residual"] = r.certificate_residual;
  res["mean_deviation"] = r.mean_deviation;
  res["mean_coefficient"] = r.mean_coefficient;
  res["solver"] = solver_json(r.solver);
  res["solver"]["distance_to_sigma"] = r.solver_distance_to_sigma;

  std::ostringstream text;
  text << "n = " << r.n << ", seed = " << r.seed << ", law = " << opt.law << "\n"
       << "mean coefficient " << sci3(r.mean_coefficient) << ", ||mean T - I||_F " << sci3(r.mean_deviation)
       << "\n"
       << "certificate residual of sigma " << sci3(r.certificate_residual) << "\n"
       << "solver: " << r.solver.iterations << " iterations, "
       << (r.solver.converged ? "converged" : "not converged") << ", distance to sigma "
       << sci3(r.solver_distance_to_sigma) << "\n";
  return report.emit(out, common.report, text.str(), kOk);
}

int cmd_sweep(const SweepOptions& opt, const CommonOptions& common, std::ostream& out) {
  std::vector<std::int64_t> dims(opt.dims.begin(), opt.dims.end());
  RunReport report("sweep", {{"dims", dims}, {"decay", opt.decay}, {"out", opt.out.string()}});
  if (opt.dims.empty()) throw Error(ErrorKind::InvalidInput, "--dims is empty");
  Index max_dim = 0;
  for (Index d : opt.dims) max_dim = std::max(max_dim, d);
  const double rank_tol = resolve_rank_tol(common.rank_tol, max_dim);
  const DecayLaw decay = parse_decay(opt.decay);

  std::ostringstream csv;
  csv << "dim,kernel_dim_sigma,kernel_dim_s1,kernel_dim_s2,min_eig_t1,min_eig_t2,op_norm_t,"
         "shared_kernel_dim,min_angle,min_nonzero_angle,certificate_residual\n";
  json rows = json::array();
  for (Index dim : opt.dims) {
    const CovMatrix sigma = build_sigma({dim, decay, {}});
    const auto [t1, t2] = build_pair_maps(dim);
    const CovMatrix s1 = conjugate(t1, sigma);
    const CovMatrix s2 = conjugate(t2, sigma);
    const BarycentreProblem problem({s1, s2});
    const double residual = verify_barycentre_certificate(sigma, problem);
    const auto cmp = compare_kernels(s1, sigma, rank_tol);
    const double norm_t = operator_norm(build_T(dim, 2.0));
    const double e1 = min_eigenvalue(t1);
    const double e2 = min_eigenvalue(t2);
    const Index k_sigma = kernel_dim(sigma, rank_tol);
    const Index k_s2 = kernel_dim(s2, rank_tol);
    csv << dim << "," << k_sigma << "," << cmp.kernel_dim_a << "," << k_s2 << "," << full(e1) << ","
        << full(e2) << "," << full(norm_t) << "," << cmp.shared_dim << "," << full(cmp.min_angle) << ","
        << full(cmp.min_nonzero_angle) << "," << full(residual) << "\n";
    rows.push_back({{"dim", dim},
                    {"kernel_dim_sigma", k_sigma},
                    {"kernel_dim_s1", cmp.kernel_dim_a},
                    {"kernel_dim_s2", k_s2},
                    {"min_eig_t1", e1},
                    {"min_eig_t2", e2},
                    {"op_norm_t", norm_t},
                    {"shared_kernel_dim", cmp.shared_dim},
                    {"certificate_residual", residual}});
  }
  write_text_file(opt.out, csv.str());
  report.output(opt.out);
  report.results()["rank_tol"] = rank_tol;
  report.results()["rows"] = rows;

  std::ostringstream text;
  text << csv.str();
  return report.emit(out, common.report, text.str(), kOk);
}

}  // namespace bwbary::cli
