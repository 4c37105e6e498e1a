#include "sgs/smr/treiber.hpp"

#include "sgs/parse.hpp"

namespace sgs::smr {

std::vector<SketchPtr<Domain>> build_ac_productions(const PtrTable& ptrs) {
  std::vector<SketchPtr<Domain>> out;
  auto mk = [](Command::Kind kind, int a, std::string text) {
    Command c;
    c.kind = kind;
    c.a = a;
    c.inserted = true;
    c.text = std::move(text);
    return c;
  };
  out.push_back(mk_com<Domain>(mk(Command::Kind::Skip, -1, "skip")));
  for (std::size_t i = 0; i < ptrs.size(); ++i) {
    if (!ptrs.protectable[i] || ptrs.shared[i]) continue;
    auto invoke = mk_com<Domain>(mk(Command::Kind::ProtectInvoke, static_cast<int>(i),
                                    "in:protect(" + ptrs.names[i] + ")"));
    auto ret = mk_com<Domain>(mk(Command::Kind::ProtectReturn, static_cast<int>(i),
                                 "re:protect(" + ptrs.names[i] + ")"));
    out.push_back(mk_seq<Domain>(invoke, ret));
  }
  for (std::size_t i = 0; i < ptrs.size(); ++i) {
    if (!ptrs.always_active[i]) continue;
    out.push_back(mk_com<Domain>(mk(Command::Kind::InvActive, static_cast<int>(i),
                                    "@inv active(" + ptrs.names[i] + ")")));
  }
  return out;
}

const std::string& treiber_pop_source() {
  static const std::string src = R"(domain smr
ptrs top local protectable, TOS shared active;
ac-insert;
sketch {
  loop inv auto {
    top := TOS;
    ( assume(top == null);
      result := EMPTY;
    []
      assume(top != null);
      ( atomic {
          top := TOS;
          assume(top != null);
        }
        next := top.next;
        atomic {
          ( assume(cas(TOS, top, next));
            flag := true;
          []
            flag := false;
          )
        }
        ( assume(flag == true);
          result := top.data;
        []
          assume(flag == false);
          skip;
        )
      []
        skip;
      )
    )
  }
}
)";
  return src;
}

const std::string& treiber_push_source() {
  static const std::string src = R"(domain smr
ptrs top local protectable, TOS shared active;
ac-insert;
sketch {
  loop inv auto {
    top := TOS;
    atomic {
      top := TOS;
      assume(top != null);
    }
    atomic {
      ( assume(cas(TOS, top, node));
        flag := true;
      []
        flag := false;
      )
    }
    ( assume(flag == true);
      skip;
    []
      assume(flag == false);
      skip;
    )
  }
}
)";
  return src;
}

std::vector<Benchmark> treiber_benchmarks() {
  std::vector<Benchmark> out;
  out.push_back(Benchmark{"treiber-push", parse_smr(treiber_push_source())});
  out.push_back(Benchmark{"treiber-pop", parse_smr(treiber_pop_source())});
  return out;
}

std::string render_mask(StateMask m) {
  if (m == kMaskTop) return "*";
  if (m == 0) return "none";
  struct Zone {
    StateMask mask;
    const char* name;
  };
  // Greedy cover: intersect named zones until the mask is reached exactly.
  static const Zone zones[] = {{kMaskEinv, "Einv"},
                               {kMaskEisu, "Eisu"},
                               {kMaskActive, "A"},
                               {kMaskSafe, "S"}};
  StateMask cover = kMaskTop;
  std::string name;
  for (const auto& z : zones) {
    if ((m & ~z.mask) == 0 && (cover & z.mask) != cover) {
      cover &= z.mask;
      if (!name.empty()) name += "&";
      name += z.name;
      if (cover == m) return name;
    }
  }
  std::string out = "{";
  bool first = true;
  for (int q = 0; q < 7; ++q) {
    if (m & bit(q)) {
      if (!first) out += ",";
      out += "q" + std::to_string(q);
      first = false;
    }
  }
  return out + "}";
}

}  // namespace sgs::smr
