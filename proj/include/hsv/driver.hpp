#pragma once

#include <hsv/model.hpp>
#include <hsv/simulate.hpp>
#include <hsv/tactics.hpp>

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <set>
#include <thread>

namespace hsv {

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  /// Per-goal wall time in the report; off by default so reports are
  /// byte-identical across runs.
  bool timing = false;
  std::optional<std::string> smt_dir;
  std::size_t cert_pairs = 1000;
};

struct FlowStatus {
  std::string name;
  std::string target;
  bool certified = false;
  CertResult cert;
  std::string error;
};

struct GoalReport {
  std::string name;
  /// Proved, Refuted, Unknown or Error.
  std::string status = "Unknown";
  std::string error;
  ProofResult proof;
  double seconds = 0;
  std::vector<std::string> smt_files;
};

inline std::string goal_status(const ProofResult& r) { return status_name(r.status); }

// ---------------------------------------------------------------------------
// Running goals
// ---------------------------------------------------------------------------

class Verifier {
 public:
  Verifier(const ModelFile& m, VerifyOptions opts) : m_(m), opts_(std::move(opts)) {
    ctx_.ds = m_.ds;
    ctx_.assumptions = m_.facts();
    ctx_.box = Box::from_assumptions(ctx_.assumptions);
    ctx_.cfg.seed = opts_.seed;
    for (const auto& f : m_.flows) flows_.push_back(certify(f));
  }

  const std::vector<FlowStatus>& flows() const { return flows_; }
  const ArithCtx& ctx() const { return ctx_; }

  Triple triple(const GoalDef& g) const { return Triple{g.pre, m_.program(g.program)->body, g.post, {}}; }

  std::vector<Expr> facts(const GoalDef& g) const {
    std::vector<Expr> out;
    for (const auto& n : g.facts) out.push_back(m_.assumption(n)->expr);
    return out;
  }

  /// Table of certified flows; all of them, or just `only`.
  FlowTable table(const std::optional<std::string>& only = std::nullopt) const {
    FlowTable t;
    for (std::size_t i = 0; i < flows_.size(); ++i) {
      const FlowDef& f = m_.flows[i];
      if (only && f.name != *only) continue;
      if (only && !flows_[i].certified) fail(ErrorCode::MissingFlow, "flow " + f.name + " failed: " + flows_[i].error);
      if (flows_[i].certified) t.add(f.name, f.ode, f.flow);
    }
    return t;
  }

  /// The VCs of a goal before discharge. The search strategies generate
  /// their VCs while running, so for them this runs the strategy.
  std::vector<VC> generate(const GoalDef& g) const {
    Triple t = triple(g);
    switch (g.method.tag) {
      case MethodTag::Wp: return gen_vcs(t, table());
      case MethodTag::Flow: return gen_vcs(t, table(g.method.flow));
      case MethodTag::DInduct:
      case MethodTag::DInductAuto: return d_induct(t);
      case MethodTag::DWeaken: return {d_weaken(t)};
      case MethodTag::DGhost: {
        auto [vcs, goal] = ghost_parts(g, t);
        for (auto& v : d_induct(goal)) vcs.push_back(v);
        number_vcs(vcs);
        return vcs;
      }
      default: {
        std::vector<VC> out;
        for (const auto& o : run(g).proof.vcs) out.push_back(o.vc);
        return out;
      }
    }
  }

  GoalReport run(const GoalDef& g) const {
    GoalReport rep;
    rep.name = g.name;
    auto start = std::chrono::steady_clock::now();
    try {
      rep.proof = prove(g);
      rep.status = goal_status(rep.proof);
    } catch (const Error& e) {
      rep.status = "Error";
      rep.error = e.what();
    }
    if (opts_.smt_dir && rep.status != "Error") rep.smt_files = export_smt(g, rep.proof);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
  }

 private:
  FlowStatus certify(const FlowDef& f) const {
    FlowStatus st{f.name, f.target, false, {}, ""};
    CertConfig cfg;
    cfg.ds = m_.ds;
    cfg.pairs = opts_.cert_pairs;
    cfg.seed = opts_.seed;
    cfg.box = ctx_.box;
    try {
      st.cert = f.lipschitz ? certify_flow(FlowCandidate{f.ode, f.flow, f.lipschitz}, cfg)
                            : local_flow_auto(f.ode, f.flow, cfg);
      st.certified = true;
    } catch (const Error& e) {
      st.error = e.what();
    }
    return st;
  }

  std::pair<std::vector<VC>, Triple> ghost_parts(const GoalDef& g, const Triple& t) const {
    GhostGoals gg = d_ghost(t, LensRef::var(g.method.ghost), g.method.ghost_inv, g.method.ghost_k, *m_.ds);
    std::vector<VC> vcs{gg.equivalence};
    if (!same(t.pre, t.post)) vcs.push_back({"", implies(t.pre, t.post), "dGhost-post", {}});
    return {vcs, gg.goal};
  }

  /// Decides each VC. Falsified VCs refute the goal only when the VCs are
  /// exact (the wlp workflow); rule premises are sufficient conditions.
  void discharge(ProofResult& res, const std::vector<VC>& vcs, const std::vector<Expr>& facts, bool exact) const {
    for (const auto& vc : vcs) {
      Verdict v = detail::decide(vc, ctx_, facts);
      if (v.is_invalid() && exact && !res.refutation) res.refutation = VcOutcome{vc, v};
      res.vcs.push_back({vc, std::move(v)});
    }
  }

  static void settle(ProofResult& res) {
    bool all = std::all_of(res.vcs.begin(), res.vcs.end(), [](const VcOutcome& o) { return o.verdict.is_valid(); });
    res.status = res.refutation ? ProofResult::Status::Refuted
                 : all          ? ProofResult::Status::Proved
                                : ProofResult::Status::Unknown;
  }

  ProofResult prove(const GoalDef& g) const {
    Triple t = triple(g);
    std::vector<Expr> facts = this->facts(g);
    ProofResult res;
    switch (g.method.tag) {
      case MethodTag::Wp:
      case MethodTag::Flow: {
        auto vcs = g.method.tag == MethodTag::Wp ? gen_vcs(t, table()) : gen_vcs(t, table(g.method.flow));
        res.note(method_str(g.method), t.post, std::to_string(vcs.size()) + " VCs");
        discharge(res, vcs, facts, true);
        break;
      }
      case MethodTag::DInduct:
      case MethodTag::DInductAuto: {
        auto vcs = d_induct(t);
        res.note("dInduct", t.post, std::to_string(vcs.size()) + " VCs");
        discharge(res, vcs, facts, false);
        break;
      }
      case MethodTag::DWeaken: {
        res.note("dWeaken", t.post);
        discharge(res, {d_weaken(t)}, facts, false);
        break;
      }
      case MethodTag::DGhost: {
        auto [vcs, goal] = ghost_parts(g, t);
        res.note("dGhost", t.pre, to_string(goal.prog));
        auto step = d_induct(goal);
        std::vector<VC> all = vcs;
        all.insert(all.end(), step.begin(), step.end());
        number_vcs(all);
        ProofResult first;
        discharge(first, all, facts, false);
        settle(first);
        if (first.proved()) {
          for (auto& v : first.vcs) res.vcs.push_back(std::move(v));
          res.note("dInduct", goal.post, std::to_string(step.size()) + " VCs");
          break;
        }
        // induction alone did not close the ghost invariant
        number_vcs(vcs);
        discharge(res, vcs, facts, false);
        ProofResult sub = d_induct_mega(goal, facts, ctx_);
        for (auto& s : sub.trace) res.trace.push_back(std::move(s));
        for (auto& v : sub.vcs) res.vcs.push_back(std::move(v));
        break;
      }
      case MethodTag::DInductMega: return d_induct_mega(t, facts, ctx_);
      case MethodTag::DProve: return d_prove(t, ctx_, table(), facts);
    }
    settle(res);
    return res;
  }

  std::vector<std::string> export_smt(const GoalDef& g, const ProofResult& r) const {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    std::set<std::string> seen;
    fs::create_directories(*opts_.smt_dir);
    for (std::size_t i = 0; i < r.vcs.size(); ++i) {
      const auto& o = r.vcs[i];
      if (o.verdict.is_valid()) continue;
      std::string id = o.vc.id.empty() ? "vc" + std::to_string(i + 1) : o.vc.id;
      if (seen.count(id)) id += "_" + std::to_string(i + 1);
      seen.insert(id);
      std::string name = g.name + "_" + id + ".smt2";
      std::string text;
      try {
        text = emit_smtlib(o.vc, ctx_.assumptions, true);
      } catch (const Error& e) {
        text = "; " + o.vc.id + " (" + o.vc.origin + ") not expressible: " + e.what() + "\n";
      }
      std::ofstream(fs::path(*opts_.smt_dir) / name, std::ios::binary) << text;
      files.push_back(name);
    }
    return files;
  }

  const ModelFile& m_;
  VerifyOptions opts_;
  ArithCtx ctx_;
  std::vector<FlowStatus> flows_;
};

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct Report {
  std::vector<FlowStatus> flows;
  std::map<std::string, GoalReport> goals;

  std::size_t count(const std::string& status) const {
    return static_cast<std::size_t>(
        std::count_if(goals.begin(), goals.end(), [&](const auto& kv) { return kv.second.status == status; }));
  }

  /// 0 all Proved, 1 a goal could not be run, 2 some goal Refuted,
  /// 3 some goal Unknown.
  int exit_code() const {
    if (count("Error")) return 1;
    if (count("Refuted")) return 2;
    if (count("Unknown")) return 3;
    return 0;
  }
};

inline Report verify(const ModelFile& m, const VerifyOptions& opts, const std::optional<std::string>& only = {}) {
  if (only && !m.goal(*only)) fail(ErrorCode::UnknownName, "no goal named '" + *only + "'");
  Verifier v(m, opts);
  std::vector<const GoalDef*> todo;
  for (const auto& g : m.goals)
    if (!only || g.name == *only) todo.push_back(&g);
  std::vector<GoalReport> out(todo.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < todo.size();) out[i] = v.run(*todo[i]);
  };
  std::size_t n = std::max<std::size_t>(1, std::min(opts.jobs, todo.size()));
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  Report r;
  r.flows = v.flows();
  for (auto& g : out) r.goals[g.name] = std::move(g);
  return r;
}

namespace detail {

inline nlohmann::json store_json(const Store& s, const Env& env) {
  nlohmann::json state = nlohmann::json::object(), logicals = nlohmann::json::object();
  const auto& ds = s.dataspace();
  for (std::size_t i = 0; i < ds.size(); ++i) state[ds.decls()[i].name] = s.values()[i].str();
  for (const auto& [k, v] : env) logicals[k] = v.str();
  return {{"state", state}, {"logicals", logicals}};
}

}  // namespace detail

inline nlohmann::json report_json(const ModelFile& m, const Report& r, const VerifyOptions& opts) {
  using nlohmann::json;
  json flows = json::object();
  for (const auto& f : r.flows) {
    json j = {{"for", f.target}, {"certified", f.certified}};
    if (f.certified) {
      j["lipschitz"] = to_string(f.cert.lipschitz);
      j["pairs"] = f.cert.pairs;
      j["max_ratio"] = f.cert.max_ratio;
    } else {
      j["error"] = f.error;
    }
    flows[f.name] = j;
  }
  json goals = json::object();
  for (const auto& [name, g] : r.goals) {
    const GoalDef* def = m.goal(name);
    json j = {{"status", g.status},
              {"method", method_str(def->method)},
              {"program", def->program},
              {"pre", to_string(def->pre)},
              {"post", to_string(def->post)},
              {"using", def->facts}};
    if (!g.error.empty()) j["error"] = g.error;
    json vcs = json::array();
    for (const auto& o : g.proof.vcs) {
      json v = {{"id", o.vc.id},
                {"origin", o.vc.origin},
                {"formula", to_string(o.vc.formula)},
                {"verdict", status_name(o.verdict.status)},
                {"detail", o.verdict.detail}};
      if (o.verdict.witness) v["witness"] = detail::store_json(*o.verdict.witness, o.verdict.env);
      vcs.push_back(v);
    }
    j["vcs"] = vcs;
    json trace = json::array();
    for (const auto& s : g.proof.trace) trace.push_back({{"rule", s.rule}, {"before", s.before}, {"after", s.after}});
    j["trace"] = trace;
    if (g.proof.refutation) {
      const auto& ref = *g.proof.refutation;
      json c = detail::store_json(*ref.verdict.witness, ref.verdict.env);
      c["vc"] = ref.vc.id;
      c["formula"] = to_string(ref.vc.formula);
      j["counterexample"] = c;
    } else {
      j["counterexample"] = nullptr;
    }
    if (!g.smt_files.empty()) j["smt"] = g.smt_files;
    if (opts.timing) j["seconds"] = g.seconds;
    goals[name] = j;
  }
  json summary = {{"goals", r.goals.size()},
                  {"proved", r.count("Proved")},
                  {"refuted", r.count("Refuted")},
                  {"unknown", r.count("Unknown")},
                  {"error", r.count("Error")}};
  return {{"schema", 1}, {"seed", opts.seed}, {"flows", flows}, {"goals", goals}, {"summary", summary}};
}

/// Human-readable summary, one line per goal plus counterexamples.
inline std::string report_text(const Report& r) {
  std::string out;
  for (const auto& f : r.flows)
    out += "flow " + f.name + ": " +
           (f.certified ? "certified (L = " + to_string(f.cert.lipschitz) + ")" : "rejected: " + f.error) + "\n";
  for (const auto& [name, g] : r.goals) {
    out += name + ": " + g.status;
    if (g.status == "Error") {
      out += " (" + g.error + ")\n";
      continue;
    }
    std::size_t valid = static_cast<std::size_t>(std::count_if(
        g.proof.vcs.begin(), g.proof.vcs.end(), [](const VcOutcome& o) { return o.verdict.is_valid(); }));
    out += " (" + std::to_string(valid) + "/" + std::to_string(g.proof.vcs.size()) + " VCs valid)\n";
    if (g.proof.refutation) {
      const auto& ref = *g.proof.refutation;
      out += "  counterexample to " + ref.vc.id + ": " + ref.verdict.witness->str();
      for (const auto& [k, v] : ref.verdict.env) out += " " + k + "=" + v.str();
      out += "\n";
    } else if (g.status == "Unknown") {
      for (const auto& o : g.proof.vcs)
        if (!o.verdict.is_valid())
          out += "  open " + o.vc.id + " (" + o.vc.origin + "): " + to_string(o.vc.formula) + "\n";
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation from the command line
// ---------------------------------------------------------------------------

/// "x=1,flw=true,v[2]=0.5" over the dataspace; unlisted names start at zero.
inline NumStore parse_init(const std::string& text, const DataspacePtr& ds) {
  NumStore s(ds);
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorCode::SyntaxError, "expected NAME=VALUE, got '" + item + "'");
    std::string name = item.substr(0, eq), value = item.substr(eq + 1);
    LensRef l = LensRef::var(name);
    if (auto br = name.find('['); br != std::string::npos && name.back() == ']')
      l = LensRef::coord(name.substr(0, br), static_cast<unsigned>(std::stoul(name.substr(br + 1))));
    if (!ds->contains(l.name)) fail(ErrorCode::UnknownName, "'" + l.name + "' is not declared");
    check_lens(l, *ds);
    Kind k = lens_kind(l, *ds);
    NumValue v;
    if (k.is_bool()) {
      if (value != "true" && value != "false") fail(ErrorCode::KindError, name + " needs true or false");
      v = NumValue(value == "true");
    } else if (k.is_real()) {
      std::size_t used = 0;
      double d = 0;
      try {
        d = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != value.size()) fail(ErrorCode::SyntaxError, "bad number '" + value + "' for " + name);
      v = NumValue(d);
    } else {
      fail(ErrorCode::KindError, "set the vector " + name + " by coordinates, e.g. " + name + "[1]=0");
    }
    s = lens_put(l, v, s);
  }
  return s;
}

}  // namespace hsv
