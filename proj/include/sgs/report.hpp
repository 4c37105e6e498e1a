#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace sgs {

struct RunConfig {
  enum class Mode { Pessimistic, Optimistic };
  Mode mode = Mode::Pessimistic;
  std::size_t oracle_budget = 64;
  int nt_depth = 8;      // default-transformer rewrite depth
  int unroll = 8;        // oracle unroll bound
  int depth = 4;         // oracle derivation depth
  std::string target = "all";
  bool emit_outline = false;
  std::string out_path;
};

struct RunOutcome {
  int exit_code = 0;
  nlohmann::ordered_json report;
  std::string text;
};

// Full pipeline on a sketch file: parse, analyze forward, discharge (in
// pessimistic mode), extract one program per requested target postcondition.
// The pseudo-paths treiber:pop and treiber:push run the built-in benchmarks.
RunOutcome run_file(const std::string& path, const RunConfig& cfg);
RunOutcome run_source(const std::string& source, const RunConfig& cfg,
                      const std::string& display_name = "<memory>");

// Renders the machine-readable report as human-readable text.
std::string emit_report(const nlohmann::ordered_json& report);

}  // namespace sgs
