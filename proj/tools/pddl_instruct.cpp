// Command-line front end. Exit codes: 0 success, 1 invalid plan / unsolved
// task, 2 usage, parse or I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "pddl_instruct.hpp"
#include "pddl_instruct/http_backend.hpp"

namespace fs = std::filesystem;
using namespace pddl_instruct;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::string& output, const std::string& text) {
  if (output.empty() || output == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw Error("cannot write '" + output + "'");
  out << text;
}

struct Globals {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string output;
  std::string config_path;
};

struct ProblemSource {
  std::string file;
  std::vector<std::string> domains;
  std::size_t count = 0;
  std::size_t blocks = 0;
};

void add_problem_flags(CLI::App* cmd, ProblemSource& src) {
  cmd->add_option("--problems", src.file, "problems.jsonl produced by gen-data");
  cmd->add_option("--domain", src.domains, "generate problems: blocksworld, mystery_blocksworld, logistics");
  cmd->add_option("--count", src.count, "number of problems to generate");
  cmd->add_option("--blocks", src.blocks, "blocks per Blocksworld problem");
}

std::vector<DomainKind> parse_kinds(const std::vector<std::string>& names, DomainKind fallback) {
  if (names.empty()) return {fallback};
  std::vector<DomainKind> out;
  for (const auto& n : names) {
    auto k = domain_kind_from_string(n);
    if (!k) throw CLI::ValidationError("--domain", "unknown domain '" + n + "'");
    out.push_back(*k);
  }
  return out;
}

std::vector<Instance> load_problems(const ProblemSource& src, RunConfig& cfg) {
  if (!src.file.empty()) return read_jsonl(src.file, instance_from_json);
  if (src.blocks > 0) cfg.generator.sizes.blocksworld.blocks = src.blocks;
  std::size_t count = src.count > 0 ? src.count : cfg.generator.problems;
  return gen_problem_set(parse_kinds(src.domains, cfg.generator.domain), cfg.generator.sizes, count, cfg.seed);
}

std::unique_ptr<ModelBackend> make_backend(const RunConfig& cfg) {
  if (cfg.backend.kind == "http") {
    if (cfg.backend.url.empty()) throw Error("http backend needs backend.url or MODEL_API_URL");
    HttpBackendOptions opt;
    opt.url = cfg.backend.url;
    opt.api_key = cfg.backend.api_key;
    opt.model = cfg.backend.model;
    opt.retries = cfg.backend.retries;
    opt.timeout = cfg.backend.timeout;
    opt.log = [](const std::string& m) { std::cerr << "backend: " << m << '\n'; };
    return std::make_unique<HttpBackend>(std::move(opt));
  }
  if (cfg.backend.script_path.empty()) throw Error("scripted backend needs --script or backend.script");
  return std::make_unique<ScriptedBackend>(load_scripted_backend(cfg.backend.script_path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STRIPS validation, planning and chain-of-thought feedback loops"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--output,-o", g.output, "output file or directory");
  app.add_option("--config", g.config_path, "run configuration (JSON, // comments allowed)");

  // validate
  auto* validate = app.add_subcommand("validate", "check a plan or reasoning trace");
  std::string v_domain, v_problem, v_plan, v_trace, v_mode = "detailed";
  validate->add_option("domain", v_domain)->required();
  validate->add_option("problem", v_problem)->required();
  auto* plan_opt = validate->add_option("--plan", v_plan, "plan file, one action per line");
  auto* trace_opt = validate->add_option("--trace", v_trace, "reasoning trace file");
  plan_opt->excludes(trace_opt);
  validate->add_option("--feedback", v_mode, "binary or detailed")->check(CLI::IsMember({"binary", "detailed"}));

  // plan
  auto* plan = app.add_subcommand("plan", "solve a task with breadth-first search");
  std::string p_domain, p_problem;
  std::size_t p_max_states = SearchLimits{}.max_expanded_states;
  double p_timeout = 60.0;
  bool p_trace = false;
  plan->add_option("domain", p_domain)->required();
  plan->add_option("problem", p_problem)->required();
  plan->add_option("--max-states", p_max_states);
  plan->add_option("--timeout", p_timeout, "seconds");
  plan->add_flag("--trace", p_trace, "print the plan as a reasoning trace");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate instruction records and a problem set");
  std::vector<std::string> g_domains;
  std::size_t g_count = 40, g_problems = 0, g_blocks = 0;
  std::vector<double> g_mix;
  gen->add_option("--domain", g_domains);
  gen->add_option("--count", g_count, "instruction records");
  gen->add_option("--problems", g_problems, "problems for the feedback loop (0: use config)");
  gen->add_option("--blocks", g_blocks);
  gen->add_option("--mix", g_mix, "five label proportions: correct precondition effect frame goal")->expected(5);

  // split
  auto* split = app.add_subcommand("split", "partition a JSONL file by problem");
  std::string s_input;
  std::vector<double> s_ratios{0.5, 0.3, 0.2};
  split->add_option("input", s_input)->required();
  split->add_option("--ratios", s_ratios, "d1 d2 test")->expected(3);

  // run-loop
  auto* loop = app.add_subcommand("run-loop", "feedback loop over a problem set");
  ProblemSource l_src;
  add_problem_flags(loop, l_src);
  std::size_t l_eta = 0;
  std::string l_mode, l_backend, l_script, l_url;
  std::size_t l_concurrency = 0;
  loop->add_option("--eta", l_eta, "iteration limit");
  loop->add_option("--mode", l_mode)->check(CLI::IsMember({"binary", "detailed"}));
  loop->add_option("--backend", l_backend)->check(CLI::IsMember({"http", "scripted"}));
  loop->add_option("--script", l_script, "scripted completions (JSON)");
  loop->add_option("--url", l_url, "chat-completion endpoint");
  loop->add_option("--concurrency", l_concurrency);

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "one-shot plan accuracy on a test set");
  ProblemSource e_src;
  add_problem_flags(eval, e_src);
  std::string e_backend, e_script, e_url;
  eval->add_option("--backend", e_backend)->check(CLI::IsMember({"http", "scripted"}));
  eval->add_option("--script", e_script);
  eval->add_option("--url", e_url);

  // losses
  auto* losses = app.add_subcommand("losses", "reasoning and final losses over dataset files");
  std::string ls_reasoning, ls_final;
  losses->add_option("--reasoning", ls_reasoning, "reasoning.jsonl");
  losses->add_option("--final", ls_final, "final.jsonl");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    RunConfig cfg = load_config(g.config_path);
    if (g.seed_set) cfg.seed = g.seed;

    if (validate->parsed()) {
      if (v_plan.empty() && v_trace.empty()) throw CLI::ValidationError("validate", "one of --plan or --trace is required");
      Domain d = parse_domain(slurp(v_domain));
      Problem p = parse_problem(slurp(v_problem), d);
      PlanVerdict verdict;
      if (!v_plan.empty()) {
        verdict = validate_plan(d, p, parse_plan(slurp(v_plan)));
      } else {
        verdict = validate_trace(d, p, parse_trace(slurp(v_trace)));
      }
      emit(g.output, render_feedback(verdict, *feedback_mode_from_string(v_mode)).text + "\n");
      return verdict.valid ? kOk : kInvalid;
    }

    if (plan->parsed()) {
      Domain d = parse_domain(slurp(p_domain));
      Problem p = parse_problem(slurp(p_problem), d);
      SearchLimits limits;
      limits.max_expanded_states = p_max_states;
      limits.timeout = std::chrono::milliseconds(static_cast<long long>(p_timeout * 1000));
      SolveResult r = solve(d, p, limits);
      if (!r.solved()) {
        std::cerr << (r.status == SolveStatus::unsolvable ? "unsolvable" : "limit exceeded: " + r.limit) << " after "
                  << r.stats.expanded << " expansions\n";
        return kInvalid;
      }
      emit(g.output, p_trace ? render_trace(simulate_trace(d, p, r.plan)) : print_plan(r.plan));
      std::cerr << "; " << r.plan.size() << " actions, " << r.stats.expanded << " states expanded\n";
      return kOk;
    }

    if (gen->parsed()) {
      fs::path dir = g.output.empty() ? fs::path("data") : fs::path(g.output);
      fs::create_directories(dir);
      if (g_blocks > 0) cfg.generator.sizes.blocksworld.blocks = g_blocks;
      Phase1Options opt;
      opt.domains = parse_kinds(g_domains, cfg.generator.domain);
      opt.sizes = cfg.generator.sizes;
      opt.count = g_count;
      opt.seed = cfg.seed;
      if (!g_mix.empty()) std::copy(g_mix.begin(), g_mix.end(), opt.mix.begin());
      auto records = make_phase1_dataset(opt);
      write_jsonl((dir / "phase1.jsonl").string(), records);
      std::size_t n = g_problems > 0 ? g_problems : cfg.generator.problems;
      auto problems = gen_problem_set(opt.domains, opt.sizes, n, cfg.seed + 1);
      write_jsonl((dir / "problems.jsonl").string(), problems);
      std::cout << records.size() << " records -> " << (dir / "phase1.jsonl").string() << '\n'
                << problems.size() << " problems -> " << (dir / "problems.jsonl").string() << '\n';
      return kOk;
    }

    if (split->parsed()) {
      auto lines = read_jsonl(s_input, [](const json& j) { return j; });
      SplitSpec spec{s_ratios[0], s_ratios[1], s_ratios[2], cfg.seed};
      auto parts = split_dataset(lines, spec, [](const json& j) {
        if (!j.contains("problem") || !j["problem"].is_string()) throw SchemaError("record has no 'problem' text");
        return j["problem"].get<std::string>();
      });
      fs::path dir = g.output.empty() ? fs::path(s_input).parent_path() : fs::path(g.output);
      if (!dir.empty()) fs::create_directories(dir);
      std::string stem = fs::path(s_input).stem().string();
      std::pair<const char*, std::vector<json>*> outs[] = {{"d1", &parts.d1}, {"d2", &parts.d2}, {"test", &parts.test}};
      for (auto& [name, part] : outs) {
        fs::path path = dir / (stem + "." + name + ".jsonl");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path.string() + "'");
        for (const auto& j : *part) out << j.dump() << '\n';
        std::cout << name << ": " << part->size() << " -> " << path.string() << '\n';
      }
      return kOk;
    }

    if (loop->parsed()) {
      if (l_eta > 0) cfg.loop.eta = l_eta;
      if (!l_mode.empty()) cfg.loop.feedback_mode = *feedback_mode_from_string(l_mode);
      if (!l_backend.empty()) cfg.backend.kind = l_backend;
      if (!l_script.empty()) cfg.backend.script_path = l_script;
      if (!l_url.empty()) cfg.backend.url = l_url;
      if (l_concurrency > 0) cfg.loop.concurrency = l_concurrency;
      auto problems = load_problems(l_src, cfg);
      auto backend = make_backend(cfg);
      fs::path dir = g.output.empty() ? fs::path("run") : fs::path(g.output);
      fs::create_directories(dir);
      CampaignOptions opt;
      opt.weights = cfg.loss;
      opt.on_iteration = [&](const IterationReport& it) {
        json manifest = write_iteration(dir, it, cfg.loop);
        if (!cfg.loop.trainer_hook_url.empty()) {
          std::cerr << "trainer hook, iteration " << it.iteration << ": "
                    << post_json(cfg.loop.trainer_hook_url, manifest) << '\n';
        }
      };
      CampaignReport report = run_campaign(*backend, problems, cfg.loop, opt);
      std::ofstream((dir / "campaign.json").string(), std::ios::binary) << to_json(report).dump(2) << '\n';
      std::cout << "solved " << report.solved << "/" << report.problems << " (" << format_percent(report.accuracy)
                << "%) in at most " << report.iterations.size() << " iteration(s); report -> "
                << (dir / "campaign.json").string() << '\n';
      return kOk;
    }

    if (eval->parsed()) {
      if (!e_backend.empty()) cfg.backend.kind = e_backend;
      if (!e_script.empty()) cfg.backend.script_path = e_script;
      if (!e_url.empty()) cfg.backend.url = e_url;
      auto problems = load_problems(e_src, cfg);
      auto backend = make_backend(cfg);
      EvalOptions opt;
      opt.temperature = cfg.evaluation_temperature;
      opt.max_tokens = cfg.loop.max_tokens;
      opt.concurrency = cfg.loop.concurrency;
      EvalResult r = evaluate(*backend, problems, opt);
      std::cout << render_table(r);
      if (!g.output.empty()) emit(g.output, to_json(r).dump(2) + "\n");
      return kOk;
    }

    if (losses->parsed()) {
      if (ls_reasoning.empty() && ls_final.empty()) {
        throw CLI::ValidationError("losses", "give --reasoning and/or --final");
      }
      std::vector<ReasoningRecord> reasoning;
      std::vector<FinalRecord> final;
      if (!ls_reasoning.empty()) reasoning = read_jsonl(ls_reasoning, reasoning_record_from_json);
      if (!ls_final.empty()) final = read_jsonl(ls_final, final_record_from_json);
      emit(g.output, to_json(compute_loss_report(reasoning, final, cfg.loss)).dump(2) + "\n");
      return kOk;
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
