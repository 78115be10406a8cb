// Command-line driver: analyze | gen | interpret | diff | bench.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "pta/derived.hpp"
#include "pta/driver.hpp"
#include "pta/error.hpp"
#include "pta/generator.hpp"
#include "pta/interpreter.hpp"

namespace fs = std::filesystem;
using namespace pta;

namespace {

enum Exit { kOk = 0, kDiagnostics = 1, kResource = 2, kInternal = 3 };

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AnalysisError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary so readers never see a partial file.
void write_file(const std::string &path, const std::string &text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw AnalysisError("cannot write " + path);
    out << text;
    if (!out) throw AnalysisError("cannot write " + path);
  }
  fs::rename(tmp, path);
}

const std::vector<std::string> kAnalyses{"fici", "steens", "kcfa", "fs", "fscs"};
const std::vector<std::string> kSolvers{"naive", "wave", "deep", "diff"};
const std::vector<std::string> kWorklists{"fifo", "lifo", "lrf", "2lrf", "topo"};
const std::vector<std::string> kOffline{"none", "hvn", "hu"};
const std::vector<std::string> kCycles{"none", "lcd", "hcd", "both"};
const std::vector<std::string> kPts{"bitvec", "sorted"};

struct AnalyzeArgs {
  std::string input, analysis = "fici", solver = "naive", worklist = "fifo", offline = "none", cycles = "none",
                     pts = "sorted", queries, dump, icfg, pdg;
  int k = 0;
  uint64_t max_props = 10'000'000, max_steps = 10'000'000;
  size_t max_clones = 1'000'000;
  CLI::Option *k_opt = nullptr;
  std::vector<CLI::Option *> solver_opts;
};

int cmd_analyze(const AnalyzeArgs &a) {
  RunConfig cfg;
  cfg.input = a.input;
  cfg.analysis = *parse_analysis(a.analysis);
  if (a.k_opt->count()) cfg.k = a.k;
  cfg.solver.strategy = *parse_strategy(a.solver);
  cfg.solver.worklist = *parse_worklist(a.worklist);
  cfg.solver.offline = *parse_offline(a.offline);
  cfg.solver.cycles = *parse_cycles(a.cycles);
  cfg.solver.backend = *parse_backend(a.pts);
  cfg.solver.max_propagations = a.max_props;
  for (CLI::Option *o : a.solver_opts) cfg.solver_flags |= o->count() > 0;
  cfg.queries = a.queries;
  cfg.dump = a.dump;
  cfg.max_steps = a.max_steps;
  cfg.max_clones = a.max_clones;
  cfg.validate();

  const std::string text = read_file(cfg.input);
  const std::string hash = content_hash(text);
  bool cached = false;
  if (!cfg.dump.empty() && fs::exists(cfg.dump) && dump_matches(read_file(cfg.dump), cfg, hash)) {
    std::cerr << "cache hit: " << cfg.dump << "\n";
    cached = true;
  }
  const bool need_result = !cached || !cfg.queries.empty() || !a.icfg.empty() || !a.pdg.empty();
  if (!need_result) return kOk;

  auto module = load_module(text, cfg.input);
  AnalysisResult r = run_analysis(module, cfg, hash);
  if (!cached) {
    std::string d = dump_result(r, cfg);
    if (!cfg.dump.empty())
      write_file(cfg.dump, d);
    else if (cfg.queries.empty())
      std::cout << d;
  }
  if (!cfg.queries.empty())
    for (const std::string &line : run_queries(r, read_file(cfg.queries))) std::cout << line << "\n";
  if (!a.icfg.empty()) write_file(a.icfg, build_icfg(r).dot(*module));
  if (!a.pdg.empty()) write_file(a.pdg, build_pdg(r, build_memory_ssa(r)).dot(*module));
  return kOk;
}

struct GenArgs {
  GenOptions opts;
  std::string weights, out, recursion = "on";
};

int cmd_gen(GenArgs a) {
  if (!a.weights.empty()) {
    std::vector<unsigned> w;
    std::stringstream ss(a.weights);
    for (std::string item; std::getline(ss, item, ',');) {
      try {
        w.push_back(static_cast<unsigned>(std::stoul(item)));
      } catch (const std::exception &) {
        throw AnalysisError("--weights: '" + item + "' is not a number");
      }
    }
    if (w.size() != 8) throw AnalysisError("--weights takes 8 values: alloc,addr,copy,load,store,field,call,icall");
    unsigned total = 0;
    for (size_t i = 0; i < 8; ++i) total += a.opts.weights[i] = w[i];
    if (total == 0) throw AnalysisError("--weights must not all be zero");
  }
  a.opts.recursion = a.recursion == "on";
  std::string text = generate_program(a.opts);
  if (a.out.empty())
    std::cout << text;
  else
    write_file(a.out, text);
  return kOk;
}

int cmd_interpret(const std::string &input, const InterpOptions &opts) {
  auto module = load_module(read_file(input), input);
  auto table = build_node_table(module);
  Trace t = interpret(table, opts);
  for (const VarFact &f : t.facts)
    std::cout << "var " << module->instr_name(f.instr) << " " << table->node_name(f.var) << " "
              << table->cell_name(f.cell) << "\n";
  for (const MemFact &f : t.loads)
    std::cout << "load " << module->instr_name(f.instr) << " " << table->cell_name(f.cell) << " "
              << table->cell_name(f.value) << "\n";
  std::cout << t.str() << "\n";
  return kOk;
}

int cmd_diff(const std::string &a, const std::string &b, const std::string &mode) {
  DiffReport rep = diff_dumps(read_file(a), read_file(b), *parse_diff_mode(mode));
  for (const std::string &line : rep.lines) std::cout << line << "\n";
  std::cout << (rep.clean() ? "clean" : std::to_string(rep.lines.size()) + " difference(s)") << "\n";
  return rep.clean() ? kOk : kDiagnostics;
}

struct BenchArgs {
  std::vector<std::string> inputs;
  std::string configs = "none/none/naive/fifo/sorted,none/none/wave/fifo/sorted,none/none/diff/fifo/sorted";
  std::string csv, ratios;
  size_t generate = 0, size = 5000;
  uint64_t seed = 1;
  BenchOptions opts;
};

int cmd_bench(const BenchArgs &a) {
  std::vector<SolverConfig> configs;
  std::stringstream ss(a.configs);
  for (std::string item; std::getline(ss, item, ',');) {
    auto c = parse_solver_config(item);
    if (!c) throw AnalysisError("--configs: cannot parse '" + item + "'");
    configs.push_back(*c);
  }
  const std::string baseline = SolverConfig::reference().str();
  bool has_baseline = false;
  for (const SolverConfig &c : configs) has_baseline |= c.str() == baseline;
  if (!has_baseline) configs.insert(configs.begin(), SolverConfig::reference());

  std::vector<std::pair<std::string, std::string>> programs;  // name, text
  for (const std::string &in : a.inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> files;
      for (const auto &e : fs::directory_iterator(in))
        if (e.is_regular_file() && e.path().extension() == ".pir") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const fs::path &p : files) programs.emplace_back(p.filename().string(), read_file(p.string()));
    } else {
      programs.emplace_back(fs::path(in).filename().string(), read_file(in));
    }
  }
  for (size_t i = 0; i < a.generate; ++i) {
    GenOptions g = bench_profile(a.seed + i, a.size);
    programs.emplace_back("gen-" + std::to_string(g.seed), generate_program(g));
  }
  if (programs.empty()) throw AnalysisError("bench: no programs (give files, directories or --generate N)");

  std::vector<BenchRow> rows;
  for (const auto &[name, text] : programs) {
    auto rs = bench_module(name, load_module(text, name), configs, a.opts);
    rows.insert(rows.end(), rs.begin(), rs.end());
  }
  std::string csv = bench_csv(rows), ratios = ratio_csv(bench_ratios(rows, baseline));
  if (a.csv.empty()) std::cout << csv;
  else write_file(a.csv, csv);
  if (a.ratios.empty()) std::cout << "\n" << ratios;
  else write_file(a.ratios, ratios);
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Pointer analysis toolkit"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto *analyze = app.add_subcommand("analyze", "Analyze a module; write a dump and answer queries");
  analyze->add_option("input", an.input, "Module file")->required();
  analyze->add_option("--analysis", an.analysis, "Analysis kind")->check(CLI::IsMember(kAnalyses));
  an.k_opt = analyze->add_option("--k", an.k, "Context depth (kcfa, fscs)");
  an.solver_opts = {
      analyze->add_option("--solver", an.solver, "Propagation strategy")->check(CLI::IsMember(kSolvers)),
      analyze->add_option("--worklist", an.worklist, "Worklist order")->check(CLI::IsMember(kWorklists)),
      analyze->add_option("--offline", an.offline, "Offline simplification")->check(CLI::IsMember(kOffline)),
      analyze->add_option("--cycles", an.cycles, "Online cycle detection")->check(CLI::IsMember(kCycles)),
      analyze->add_option("--pts", an.pts, "Points-to set representation")->check(CLI::IsMember(kPts)),
  };
  analyze->add_option("--queries", an.queries, "Query script");
  analyze->add_option("--dump", an.dump, "Dump file (reused when provenance matches)");
  analyze->add_option("--max-props", an.max_props, "Propagation cap");
  analyze->add_option("--max-steps", an.max_steps, "Flow-sensitive step cap");
  analyze->add_option("--max-clones", an.max_clones, "Clone cap (kcfa, fscs)");
  analyze->add_option("--icfg", an.icfg, "Write the ICFG in DOT format");
  analyze->add_option("--pdg", an.pdg, "Write the PDG in DOT format");

  GenArgs gen;
  auto *g = app.add_subcommand("gen", "Generate a random module");
  g->add_option("--seed", gen.opts.seed, "Random seed");
  g->add_option("--size", gen.opts.size, "Approximate instruction count");
  g->add_option("--functions", gen.opts.functions, "Function count (0: derived from size)");
  g->add_option("--vars", gen.opts.vars_per_function, "Variables per function");
  g->add_option("--globals", gen.opts.globals, "Global count");
  g->add_option("--block-size", gen.opts.block_size, "Mean block length");
  g->add_option("--weights", gen.weights, "alloc,addr,copy,load,store,field,call,icall");
  g->add_option("--branch-density", gen.opts.branch_density, "Two-target branches, per mille");
  g->add_option("--recursion", gen.recursion, "Allow recursive calls")->check(CLI::IsMember({"on", "off"}));
  g->add_option("--recursion-density", gen.opts.recursion_density, "Back calls, per mille");
  g->add_option("--call-window", gen.opts.call_window, "Callee distance limit (0: any later function)");
  g->add_flag("--deterministic", gen.opts.deterministic, "Single-path, terminating programs");
  g->add_option("-o,--output", gen.out, "Output file");

  std::string interp_input;
  InterpOptions iopts;
  auto *interp = app.add_subcommand("interpret", "Run a deterministic module and print observed facts");
  interp->add_option("input", interp_input, "Module file")->required();
  interp->add_option("--max-steps", iopts.max_steps, "Step cap");
  interp->add_option("--max-instances", iopts.max_instances, "Instances per alloc site");
  interp->add_option("--max-depth", iopts.max_depth, "Call depth cap");

  std::string diff_a, diff_b, diff_mode = "equal";
  auto *diff = app.add_subcommand("diff", "Compare two dumps");
  diff->add_option("first", diff_a, "Dump file")->required();
  diff->add_option("second", diff_b, "Dump file")->required();
  diff->add_option("--mode", diff_mode, "equal, or subset (first within second)")
      ->check(CLI::IsMember({"equal", "subset"}));

  BenchArgs bench;
  auto *b = app.add_subcommand("bench", "Benchmark solver configurations");
  b->add_option("inputs", bench.inputs, "Module files or directories of .pir files");
  b->add_option("--configs", bench.configs, "Comma-separated solver configurations");
  b->add_option("--runs", bench.opts.runs, "Timed runs per configuration (median reported)");
  b->add_option("--warmup", bench.opts.warmup, "Untimed runs per configuration");
  b->add_option("--generate", bench.generate, "Also bench N generated programs");
  b->add_option("--size", bench.size, "Size of generated programs");
  b->add_option("--seed", bench.seed, "First seed of generated programs");
  b->add_option("--max-props", bench.opts.max_propagations, "Propagation cap");
  b->add_option("--csv", bench.csv, "Write the per-run CSV here");
  b->add_option("--ratios", bench.ratios, "Write the ratio table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kDiagnostics;
  }

  try {
    if (*analyze) return cmd_analyze(an);
    if (*g) return cmd_gen(gen);
    if (*interp) return cmd_interpret(interp_input, iopts);
    if (*diff) return cmd_diff(diff_a, diff_b, diff_mode);
    if (*b) return cmd_bench(bench);
  } catch (const SolveLimitError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kResource;
  } catch (const ResourceLimitError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kResource;
  } catch (const InvariantError &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const AnalysisError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiagnostics;
  } catch (const fs::filesystem_error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiagnostics;
  } catch (const std::logic_error &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDiagnostics;
  }
  return kOk;
}
