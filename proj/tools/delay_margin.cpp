// Batch front-end: reads a JSON problem, runs it, writes a JSON report.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "delaymargin/errors.hpp"
#include "delaymargin/problem.hpp"

namespace {

using delaymargin::cli::Diagnostic;
using delaymargin::cli::json;

void print_diagnostics(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << d.path << ": " << d.message << '\n';
}

int emit(const json& report, const std::string& out_path) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out_path);
  if (!f) {
    std::cerr << "cannot write " << out_path << '\n';
    return 1;
  }
  f << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay margins and H-infinity certificates for operator delay systems"};
  app.require_subcommand(1);

  std::string in_path, out_path, csv_dir;
  double tol = 0.0, h_max = 0.0;
  std::uint64_t seed = 0;

  const std::vector<std::string> kinds = {"margin", "hinf", "zen-verify", "neutral-demo", "unbounded-demo"};
  std::vector<CLI::App*> runs;
  for (const auto& kind : kinds) {
    auto* sub = app.add_subcommand(kind);
    const bool demo = kind == "neutral-demo" || kind == "unbounded-demo";
    auto* in = sub->add_option("--in", in_path, "problem file (JSON)")->check(CLI::ExistingFile);
    if (!demo) in->required();
    sub->add_option("--out", out_path, "report path (default: stdout)");
    sub->add_option("--csv", csv_dir, "directory for events.csv and norm_grid.csv");
    sub->add_option("--tol", tol, "tolerance override")->check(CLI::PositiveNumber);
    sub->add_option("--h-max", h_max, "delay sweep bound override")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed for randomized sampling");
    runs.push_back(sub);
  }
  auto* validate = app.add_subcommand("validate", "schema check only");
  validate->add_option("--in", in_path, "problem file (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  std::vector<Diagnostic> diags;
  if (validate->parsed()) {
    const auto doc = delaymargin::cli::load_problem(in_path, diags);
    if (doc) diags = delaymargin::cli::validate_problem(*doc);
    print_diagnostics(diags);
    if (diags.empty()) std::cout << "valid\n";
    return diags.empty() ? 0 : 1;
  }

  for (std::size_t k = 0; k < runs.size(); ++k) {
    CLI::App* sub = runs[k];
    if (!sub->parsed()) continue;
    const std::string& kind = kinds[k];

    json doc = {{"kind", kind}};
    if (!in_path.empty()) {
      const auto loaded = delaymargin::cli::load_problem(in_path, diags);
      if (!loaded) {
        print_diagnostics(diags);
        return 1;
      }
      doc = *loaded;
    }
    diags = delaymargin::cli::validate_problem(doc, kind);
    if (!diags.empty()) {
      print_diagnostics(diags);
      return 1;
    }

    delaymargin::cli::RunConfig cfg;
    if (sub->count("--tol")) cfg.tol = tol;
    if (sub->count("--h-max")) cfg.h_max = h_max;
    cfg.seed = seed;
    try {
      const auto out = delaymargin::cli::run_problem(kind, doc, cfg);
      if (!csv_dir.empty()) delaymargin::cli::write_csv(csv_dir, out);
      if (emit(out.report, out_path) != 0) return 1;
      return out.exit_code;
    } catch (const delaymargin::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "internal error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}
