#include "amortlab/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

#include "amortlab/counters.hpp"
#include "amortlab/json_io.hpp"
#include "amortlab/parse.hpp"
#include "amortlab/suites.hpp"

namespace amortlab {

namespace {

constexpr int exit_ok = 0;
constexpr int exit_fail = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Model model_arg(const std::string& name) {
  auto m = parse_model(name);
  if (!m) throw UsageError("unknown model '" + name + "'");
  return *m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write " + path);
  f << text;
}

int cmd_run(const std::string& file, Model model, bool trace, bool as_json, std::ostream& out, std::ostream& err) {
  Program p;
  try {
    p = parse(read_file(file));
  } catch (const ParseError& e) {
    err << file << ":" << e.line() << ":" << e.column() << ": " << e.what() << "\n";
    return exit_usage;
  }
  EvalOptions opts;
  opts.trace = trace;
  try {
    Heap h = initial_heap(p, model);
    std::int64_t phi = potential_signed(h, model);
    EvalOutcome o = evaluate(p.functions, std::move(h), p.main, model, opts);
    for (const auto& row : o.trace) out << trace_row_json(row).dump() << "\n";
    if (as_json) {
      out << outcome_json(o, model, phi).dump() << "\n";
    } else {
      out << "model " << model_name(model) << "\n";
      out << "cost " << o.cost.k;
      if (is_debit(model)) out << " " << o.cost.kprime;
      out << "\nvalue " << print(o.value) << "\n";
      out << "phi " << phi << " -> " << potential_signed(o.heap, model) << "\n";
      out << describe(o.heap);
    }
    return exit_ok;
  } catch (const StuckError& e) {
    if (as_json) {
      out << nlohmann::json{{"model", model_name(model)}, {"stuck", stuck_name(e.kind())}, {"detail", e.what()}}.dump()
          << "\n";
    }
    err << "stuck: " << e.what() << "\n";
    return exit_fail;
  }
}

int cmd_counter(const std::string& spec_name, std::uint64_t n, const std::string& usage_text, const std::string& csv,
                std::ostream& out) {
  auto spec = parse_counter_spec(spec_name);
  if (!spec) throw UsageError("unknown counter spec '" + spec_name + "'");
  Usage usage;
  try {
    usage = Usage::parse(usage_text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  ExperimentReport r = run_increment_experiment(*spec, n, usage);
  if (csv == "-") {
    out << r.csv();
  } else {
    if (!csv.empty()) write_file(csv, r.csv());
    out << "spec " << counter_spec_name(*spec) << " usage " << usage.str() << " ops " << r.rows.size() << "\n";
    out << "model_cost " << r.total_model_cost.k << " " << r.total_model_cost.kprime << "\n";
    out << "real_cost " << r.total_real_cost << "\n";
    out << "stuck " << r.stuck_events << "\n";
    for (const auto& row : r.rows) {
      if (row.stuck && row.stuck_reason != "halted") out << "step " << row.step << " stuck: " << row.stuck_reason << "\n";
    }
  }
  return r.stuck_events == 0 ? exit_ok : exit_fail;
}

int cmd_soundness(Model model, const std::string& dir, std::size_t random, std::uint64_t seed,
                  const std::string& csv, std::ostream& out, std::ostream& err) {
  std::vector<SoundnessItem> items;
  if (!dir.empty()) {
    if (!std::filesystem::is_directory(dir)) throw UsageError("not a directory: " + dir);
    items = corpus_soundness_suite(model, dir);
  } else {
    items = random_soundness_suite(model, random, seed);
  }
  for (const auto& item : items) {
    nlohmann::json j = soundness_json(item.verdict);
    j["index"] = item.index;
    if (item.source.empty()) j["seed"] = item.seed;
    else j["source"] = item.source;
    out << j.dump() << "\n";
  }
  SoundnessSummary s = summarize(model, items);
  std::string table = SoundnessSummary::csv_header() + s.csv_row();
  if (!csv.empty()) write_file(csv, table);
  err << table;
  return s.fail == 0 ? exit_ok : exit_fail;
}

int cmd_persistence(Model model, std::size_t random, std::size_t actions, std::uint64_t seed, std::ostream& out,
                    std::ostream& err) {
  auto items = random_persistence_suite(model, random, actions, seed);
  std::size_t pass = 0, fail = 0, skipped = 0;
  for (const auto& item : items) {
    nlohmann::json j = persistence_json(item.verdict);
    j["index"] = item.index;
    j["program_seed"] = item.program_seed;
    out << j.dump() << "\n";
    switch (item.verdict.verdict) {
      case TrialVerdict::pass: ++pass; break;
      case TrialVerdict::fail: ++fail; break;
      case TrialVerdict::skipped: ++skipped; break;
    }
  }
  err << "model,trials,pass,fail,skipped\n"
      << model_name(model) << "," << items.size() << "," << pass << "," << fail << "," << skipped << "\n";
  return fail == 0 ? exit_ok : exit_fail;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cost-semantics interpreter and checker for amortised lazy programs", "amortlab"};
  app.require_subcommand(1);

  std::string model_text = "real";
  std::string file;
  bool trace = false, as_json = false;
  auto* run = app.add_subcommand("run", "evaluate a program under a cost model");
  run->add_option("file", file, "program (.aml)")->required();
  run->add_option("--model", model_text, "real, bankers, credit, credit-inherit, debit, debit-inherit, debit-unsound");
  run->add_flag("--trace", trace, "one JSON line per applied rule");
  run->add_flag("--json", as_json, "print the result as JSON");

  std::string spec = "seq", usage = "sequential", csv;
  std::uint64_t n = 0;
  auto* counter = app.add_subcommand("counter", "binary counter increment experiments");
  counter->add_option("--spec", spec, "seq, credit or debit")->required();
  counter->add_option("--n", n, "sequential increments from End")->required();
  counter->add_option("--usage", usage, "sequential, persistent:M or random:SEED");
  counter->add_option("--csv", csv, "write per-step CSV to PATH ('-' for stdout)");

  auto* check = app.add_subcommand("check", "property suites");
  check->require_subcommand(1);
  std::string programs;
  std::size_t random = 0, actions = 16;
  std::uint64_t seed = 0;
  auto* sound = check->add_subcommand("soundness", "soundness inequality and erasure agreement");
  sound->add_option("--model", model_text)->required();
  auto* programs_opt = sound->add_option("--programs", programs, "directory of .aml programs");
  auto* random_opt = sound->add_option("--random", random, "number of generated programs");
  programs_opt->excludes(random_opt);
  sound->add_option("--seed", seed);
  sound->add_option("--csv", csv, "write the summary CSV to PATH");

  auto* persist = check->add_subcommand("persistence", "persistence trials over accessible extensions");
  persist->add_option("--model", model_text)->required();
  persist->add_option("--random", random, "number of trials")->required();
  persist->add_option("--actions", actions, "action budget per trial");
  persist->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return exit_usage;
  }

  try {
    if (*run) return cmd_run(file, model_arg(model_text), trace, as_json, out, err);
    if (*counter) return cmd_counter(spec, n, usage, csv, out);
    if (*sound) {
      if (programs.empty() && random_opt->count() == 0) throw UsageError("give --programs DIR or --random K");
      return cmd_soundness(model_arg(model_text), programs, random, seed, csv, out, err);
    }
    if (*persist) return cmd_persistence(model_arg(model_text), random, actions, seed, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_fail;
  }
  return exit_usage;
}

}  // namespace amortlab
