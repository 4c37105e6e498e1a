#pragma once

#include <string>
#include <vector>

#include "sgs/parse.hpp"
#include "sgs/sketch.hpp"
#include "sgs/smr/domain.hpp"

namespace sgs::smr {

// Enrichment productions for one hazard pointer: skip first, then a protect
// pair per protectable pointer, then an activeness annotation per sentinel.
// The ordering realizes the preference for skip over SMR calls and SMR calls
// over annotations during extraction.
std::vector<SketchPtr<Domain>> build_ac_productions(const PtrTable& ptrs);

struct Benchmark {
  std::string name;
  Task<Domain> task;
};

// Treiber stack push and pop with the enrichment nonterminal inserted after
// every line; pre and post are the no-failure selection.
std::vector<Benchmark> treiber_benchmarks();

const std::string& treiber_pop_source();
const std::string& treiber_push_source();

}  // namespace sgs::smr
