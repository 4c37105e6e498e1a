#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgs/finite.hpp"
#include "sgs/sketch.hpp"
#include "sgs/smr/domain.hpp"

namespace sgs {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
};

// A fully resolved synthesis task: domain instance, grammar, sketch with
// preorder node ids, and the pre/post selections.
template <class D>
struct Task {
  D dom;
  Grammar<D> grammar;
  SketchPtr<D> sketch;
  Selection<D> pre, post;
  std::vector<std::string> warnings;
  int node_count = 0;

  Task(D d) : dom(std::move(d)) {}
};

struct ParsedFile {
  std::string domain;  // "finite" or "smr"
  std::optional<Task<finite::Domain>> finite_task;
  std::optional<Task<smr::Domain>> smr_task;
};

// Parses the sketch file format. Throws ParseError with line/column on
// malformed input, undeclared nonterminals, or empty production sets.
ParsedFile parse_sketch(const std::string& text);

// Convenience for tests and embedded benchmark sources.
Task<finite::Domain> parse_finite(const std::string& text);
Task<smr::Domain> parse_smr(const std::string& text);

}  // namespace sgs
