#include "sgs/report.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "sgs/engine.hpp"
#include "sgs/parse.hpp"
#include "sgs/smr/treiber.hpp"
#include "sgs/syn.hpp"

namespace sgs {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <class D>
std::string render_program(const D& dom, const SketchPtr<D>& p, int indent = 0) {
  std::string pad(indent * 2, ' ');
  switch (p->kind) {
    case SketchKind::Com:
      return pad + dom.render_command(p->cmd) + ";\n";
    case SketchKind::Seq:
      return render_program(dom, p->left, indent) + render_program(dom, p->right, indent);
    case SketchKind::Choice:
      return pad + "(\n" + render_program(dom, p->left, indent + 1) + pad + "[]\n" +
             render_program(dom, p->right, indent + 1) + pad + ")\n";
    case SketchKind::Star:
      return pad + "loop {\n" + render_program(dom, p->body, indent + 1) + pad + "}\n";
    case SketchKind::Nonterminal:
      return pad + p->name + ";\n";
  }
  return "";
}

template <class D>
nlohmann::ordered_json outline_json(const D& dom, const OutlinePtr<D>& po) {
  nlohmann::ordered_json j;
  j["id"] = po->sk ? po->sk->id : -1;
  switch (po->kind) {
    case SketchKind::Com:
      j["kind"] = "com";
      j["command"] = dom.render_command(po->sk->cmd);
      break;
    case SketchKind::Seq:
      j["kind"] = "seq";
      break;
    case SketchKind::Choice:
      j["kind"] = "choice";
      break;
    case SketchKind::Star:
      j["kind"] = "star";
      j["invariant"] = po->invariant.render(dom);
      break;
    case SketchKind::Nonterminal:
      j["kind"] = "nonterminal";
      j["name"] = po->sk->name;
      j["explored_productions"] = po->explored_j;
      break;
  }
  j["pre"] = po->pre.render(dom);
  j["post"] = po->post.render(dom);
  if (!po->children.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : po->children) arr.push_back(outline_json(dom, c));
    j["children"] = arr;
  }
  return j;
}

template <class D>
RunOutcome run_task(Task<D>& task, const RunConfig& cfg, const std::string& name) {
  RunOutcome out;
  nlohmann::ordered_json& rep = out.report;
  rep["file"] = name;
  rep["mode"] = cfg.mode == RunConfig::Mode::Pessimistic ? "pessimistic" : "optimistic";
  rep["pre"] = task.pre.render(task.dom);
  rep["post"] = task.post.render(task.dom);
  for (const auto& w : task.warnings) rep["warnings"].push_back(w);

  EngineConfig ecfg;
  ecfg.oracle_budget = cfg.oracle_budget;
  ecfg.nt_depth = cfg.nt_depth;
  ecfg.prune_fail = std::is_same_v<D, smr::Domain>;
  Engine<D> engine(&task.dom, &task.grammar, ecfg);

  auto t0 = Clock::now();
  auto [vcrep, outline] = engine.gen_vcs(task.pre, task.sketch, task.post);
  bool vcs_valid = true;
  if (cfg.mode == RunConfig::Mode::Pessimistic) {
    vcs_valid = engine.discharge(vcrep);
  }
  double vc_ms = ms_since(t0);

  nlohmann::ordered_json vcj;
  vcj["raw"] = vcrep.vcs.size();
  vcj["unique"] = vcrep.unique_count;
  vcj["discharged"] = vcrep.discharged;
  vcj["valid"] = vcrep.discharged ? vcrep.all_valid : true;
  vcj["pred_leq"] = engine.counters().vc_pred_leq;
  vcj["filter_pred_leq"] = vcrep.filter_pred_leq;
  {
    nlohmann::ordered_json js;
    for (const auto& [node, j] : vcrep.nonterminal_j)
      js[std::to_string(node)] = j;
    vcj["nonterminal_j"] = js;
  }
  if (!vcrep.annotation_error.empty()) vcj["annotation_error"] = vcrep.annotation_error;
  rep["vc"] = vcj;

  if (cfg.mode == RunConfig::Mode::Pessimistic && !vcs_valid) {
    rep["verdict"] = "unrealizable";
    if (vcrep.witness) {
      rep["witness"] = vcrep.witness->render(task.dom);
      rep["witness_node"] = vcrep.witness_node;
      rep["witness_note"] = vcrep.witness_note;
    }
    rep["vc_checks"] = engine.counters().vc_pred_leq;
    rep["syn_checks"] = 0;
    rep["vc_ms"] = vc_ms;
    rep["syn_ms"] = 0.0;
    out.exit_code = 1;
    out.text = emit_report(rep);
    return out;
  }

  // Target postconditions: every non-fail predicate, or one by index.
  std::vector<Pred<D>> targets;
  for (const auto& s : task.post.preds())
    if (!s.is_fail()) targets.push_back(s);
  if (cfg.target != "all") {
    std::size_t idx = std::stoul(cfg.target);
    if (idx >= targets.size()) {
      rep["verdict"] = "error";
      rep["error"] = "target index out of range";
      out.exit_code = 2;
      out.text = emit_report(rep);
      return out;
    }
    targets = {targets[idx]};
  }

  auto t1 = Clock::now();
  auto targets_json = nlohmann::ordered_json::array();
  bool all_ok = true;
  std::string first_program;
  std::uint64_t syn_checks_total = 0;
  for (const auto& s : targets) {
    nlohmann::ordered_json tj;
    tj["target"] = s.render(task.dom);
    std::uint64_t before = engine.counters().syn_checks;
    auto res = syn_for_target(engine, outline, engine.store(), s);
    std::uint64_t checks = engine.counters().syn_checks - before;
    syn_checks_total += checks;
    tj["syn_checks"] = checks;
    if (res.ok) {
      tj["status"] = "synthesized";
      tj["precondition"] = res.pre.render(task.dom);
      tj["program"] = render_program(task.dom, res.program);
      if (first_program.empty()) first_program = tj["program"];
    } else {
      all_ok = false;
      tj["status"] = cfg.mode == RunConfig::Mode::Optimistic
                         ? "not synthesized (outline unvalidated)"
                         : "not synthesized";
      tj["abort_node"] = res.abort_node;
    }
    targets_json.push_back(std::move(tj));
  }
  double syn_ms = ms_since(t1);

  rep["verdict"] = all_ok ? "synthesized" : "failed";
  rep["program"] = first_program;
  rep["vc_checks"] = engine.counters().vc_pred_leq;
  rep["syn_checks"] = syn_checks_total;
  rep["syn_pred_leq"] = engine.counters().syn_pred_leq;
  rep["vc_ms"] = vc_ms;
  rep["syn_ms"] = syn_ms;
  rep["targets"] = targets_json;
  if (cfg.emit_outline) rep["outline"] = outline_json(task.dom, outline);

  out.exit_code = all_ok ? 0 : 1;
  out.text = emit_report(rep);
  return out;
}

}  // namespace

std::string emit_report(const nlohmann::ordered_json& rep) {
  std::ostringstream os;
  os << "== " << rep.value("file", "?") << " (" << rep.value("mode", "?") << ")\n";
  os << "verdict: " << rep.value("verdict", "?") << "\n";
  if (rep.contains("vc")) {
    const auto& vc = rep["vc"];
    os << "vc: raw=" << vc.value("raw", 0) << " unique=" << vc.value("unique", 0)
       << " valid=" << (vc.value("valid", false) ? "yes" : "no")
       << " pred_leq=" << vc.value("pred_leq", 0) << "\n";
    if (vc.contains("annotation_error"))
      os << "annotation error: " << vc["annotation_error"].get<std::string>() << "\n";
  }
  if (rep.contains("witness"))
    os << "witness: " << rep["witness"].get<std::string>() << " at node "
       << rep.value("witness_node", -1) << "\n";
  if (rep.contains("targets")) {
    for (const auto& t : rep["targets"]) {
      os << "target " << t.value("target", "?") << ": " << t.value("status", "?");
      if (t.contains("precondition"))
        os << " from " << t["precondition"].get<std::string>();
      os << " (syn_checks=" << t.value("syn_checks", 0) << ")\n";
      if (t.contains("program")) os << t["program"].get<std::string>();
    }
  }
  os << "vc_ms=" << rep.value("vc_ms", 0.0) << " syn_ms=" << rep.value("syn_ms", 0.0)
     << "\n";
  return os.str();
}

RunOutcome run_source(const std::string& source, const RunConfig& cfg,
                      const std::string& display_name) {
  RunOutcome out;
  try {
    auto parsed = parse_sketch(source);
    RunOutcome res;
    if (parsed.finite_task) {
      res = run_task(*parsed.finite_task, cfg, display_name);
      res.report["domain"] = "finite";
    } else {
      res = run_task(*parsed.smr_task, cfg, display_name);
      res.report["domain"] = "smr";
    }
    if (!cfg.out_path.empty()) {
      std::ofstream f(cfg.out_path);
      if (!f) {
        res.report["error"] = "cannot write output path " + cfg.out_path;
        res.exit_code = 2;
      } else {
        f << res.report.dump(2) << "\n";
      }
    }
    return res;
  } catch (const ParseError& e) {
    out.exit_code = 2;
    out.report["verdict"] = "error";
    out.report["error"] = e.what();
    out.text = std::string(e.what()) + "\n";
    return out;
  }
}

RunOutcome run_file(const std::string& path, const RunConfig& cfg) {
  std::string source;
  if (path == "treiber:pop") {
    source = smr::treiber_pop_source();
  } else if (path == "treiber:push") {
    source = smr::treiber_push_source();
  } else {
    std::ifstream f(path);
    if (!f) {
      RunOutcome out;
      out.exit_code = 2;
      out.report["verdict"] = "error";
      out.report["error"] = "cannot open " + path;
      out.text = "cannot open " + path + "\n";
      return out;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    source = ss.str();
  }
  return run_source(source, cfg, path);
}

}  // namespace sgs
