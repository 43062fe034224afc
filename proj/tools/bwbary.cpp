// bwbary: construct, verify and explore Bures-Wasserstein barycentres of
// covariance matrices built from the doubling shift.

#include <iostream>

#include <CLI11.hpp>

#include "bwbary/commands.hpp"

namespace cli = bwbary::cli;

int main(int argc, char** argv) {
  CLI::App app{"Bures-Wasserstein barycentre toolkit"};
  app.require_subcommand(1);

  cli::CommonOptions common;
  std::string report_format = "text";
  double rank_tol = 0.0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--report", report_format, "Report format")
        ->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--rank-tol", rank_tol, "Relative rank tolerance (overrides BW_RANK_TOL)");
  };

  cli::ConstructOptions construct;
  auto* c = app.add_subcommand("construct", "Build sigma, the maps and the conjugated covariances");
  c->add_option("--dim", construct.dim, "Truncation dimension");
  c->add_option("--decay", construct.decay, "geometric:<r> or list:<v,...>");
  double c_value = 2.0;
  auto* c_opt = c->add_option("--c", c_value, "Identity multiple in T = F + F^T + cI");
  c->add_flag("--pair", construct.pair, "Build the pair T1, T2 (default)");
  std::string law;
  auto* law_opt = c->add_option("--law", law, "Random map law: uniform, two-point, antithetic, triangular");
  c->add_option("--seed", construct.seed, "Seed for --law");
  c->add_option("--out", construct.out, "Output directory");
  add_common(c);

  cli::VerifyOptions verify;
  auto* v = app.add_subcommand("verify", "Check the barycentre certificate of a candidate");
  v->add_option("--candidate", verify.candidate, "Candidate covariance file")->required();
  v->add_option("--inputs", verify.inputs, "Input covariance files")->required()->delimiter(',');
  v->add_option("--weights", verify.weights, "Weights (default uniform)")->delimiter(',');
  v->add_option("--tol", verify.tol, "Residual tolerance");
  add_common(v);

  cli::BarycentreOptions bary;
  auto* b = app.add_subcommand("barycentre", "Run the fixed-point barycentre solver");
  b->add_option("--inputs", bary.inputs, "Input covariance files")->required()->delimiter(',');
  b->add_option("--weights", bary.weights, "Weights (default uniform)")->delimiter(',');
  b->add_option("--tol", bary.tol, "Relative change stopping threshold");
  b->add_option("--max-iter", bary.max_iter, "Iteration cap");
  b->add_option("--ridge", bary.ridge, "Initial ridge added to the iterate");
  b->add_option("--ridge-decay", bary.ridge_decay, "Ridge multiplier per iteration");
  std::string init;
  auto* init_opt = b->add_option("--init", init, "Initial covariance (default: Euclidean mean)");
  b->add_option("--out", bary.out, "Barycentre output file");
  std::string history;
  auto* history_opt = b->add_option("--history", history, "Per-iteration CSV (default <out>.history.csv)");
  add_common(b);

  cli::RecurrenceOptions rec;
  auto* r = app.add_subcommand("recurrence", "Compare the kernel recurrence with its closed form");
  r->add_option("--y0", rec.y0, "Seed y0");
  r->add_option("--y1", rec.y1, "Seed y1");
  r->add_option("--sign", rec.sign, "plus (1+2t+t^2) or minus (1-2t+t^2)");
  r->add_option("--steps", rec.steps, "Horizon J (<= 60)");
  r->add_option("--out", rec.out, "CSV output ('-' for stdout)");
  add_common(r);

  cli::McOptions mc;
  auto* m = app.add_subcommand("mc", "Monte-Carlo population version with random maps");
  m->add_option("--dim", mc.dim, "Truncation dimension");
  m->add_option("--decay", mc.decay, "geometric:<r> or list:<v,...>");
  m->add_option("--law", mc.law, "uniform, two-point, antithetic, triangular");
  m->add_option("--n", mc.n, "Number of draws");
  m->add_option("--seed", mc.seed, "Seed");
  m->add_option("--tol", mc.tol, "Solver tolerance");
  m->add_option("--max-iter", mc.max_iter, "Solver iteration cap");
  m->add_option("--ridge", mc.ridge, "Solver ridge");
  m->add_option("--ridge-decay", mc.ridge_decay, "Solver ridge decay");
  add_common(m);

  cli::SweepOptions sweep;
  auto* s = app.add_subcommand("sweep", "Truncation study over several dimensions");
  s->add_option("--dims", sweep.dims, "Dimensions")->delimiter(',');
  s->add_option("--decay", sweep.decay, "geometric:<r> or list:<v,...>");
  s->add_option("--out", sweep.out, "CSV output");
  add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every other parse problem is invalid input.
    return app.exit(e) == 0 ? 0 : cli::kInvalidInput;
  }

  common.report = report_format == "json" ? cli::ReportFormat::Json : cli::ReportFormat::Text;
  for (auto* sub : app.get_subcommands()) {
    if (sub->get_option("--rank-tol")->count() > 0) common.rank_tol = rank_tol;
  }
  if (c_opt->count() > 0) construct.c = c_value;
  if (law_opt->count() > 0) construct.law = law;
  if (init_opt->count() > 0) bary.init = init;
  if (history_opt->count() > 0) bary.history = history;

  return cli::run_guarded(
      [&]() -> int {
        if (c->parsed()) return cli::cmd_construct(construct, common, std::cout);
        if (v->parsed()) return cli::cmd_verify(verify, common, std::cout);
        if (b->parsed()) return cli::cmd_barycentre(bary, common, std::cout);
        if (r->parsed()) return cli::cmd_recurrence(rec, common, std::cout);
        if (m->parsed()) return cli::cmd_mc(mc, common, std::cout);
        return cli::cmd_sweep(sweep, common, std::cout);
      },
      std::cerr);
}
