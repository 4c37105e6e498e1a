#include <iostream>

#include <CLI11.hpp>

#include "sgs/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Semantics-guided synthesis over selections: forward proof, "
               "backward extraction"};

  std::string file;
  std::string mode = "pessimistic";
  std::string domain;
  std::string target = "all";
  sgs::RunConfig cfg;
  bool json_out = false;

  app.add_option("file", file,
                 "sketch file, or treiber:pop / treiber:push for the built-in "
                 "benchmarks")
      ->required();
  app.add_option("--mode", mode, "pessimistic|optimistic")
      ->check(CLI::IsMember({"pessimistic", "optimistic"}));
  app.add_option("--domain", domain,
                 "expected domain (finite|smr); checked against the file");
  app.add_option("--oracle-budget", cfg.oracle_budget, "max oracle programs per nonterminal");
  app.add_option("--unroll", cfg.unroll, "oracle loop unroll bound");
  app.add_option("--depth", cfg.depth, "oracle derivation depth");
  app.add_option("--nt-depth", cfg.nt_depth, "default transformer rewrite depth");
  app.add_option("--target", target, "target postcondition index, or all");
  app.add_flag("--emit-outline", cfg.emit_outline, "include the proof outline in the report");
  app.add_flag("--json", json_out, "print the machine-readable report");
  app.add_option("--out", cfg.out_path, "write the JSON report to a file");

  CLI11_PARSE(app, argc, argv);

  cfg.mode = mode == "optimistic" ? sgs::RunConfig::Mode::Optimistic
                                  : sgs::RunConfig::Mode::Pessimistic;
  cfg.target = target;

  auto outcome = sgs::run_file(file, cfg);
  if (!domain.empty() && outcome.report.contains("domain") &&
      outcome.report["domain"] != domain) {
    std::cerr << "file domain is " << outcome.report["domain"]
              << ", expected " << domain << "\n";
    return 2;
  }
  if (json_out)
    std::cout << outcome.report.dump(2) << "\n";
  else
    std::cout << outcome.text;
  return outcome.exit_code;
}
