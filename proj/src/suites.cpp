#include "amortlab/suites.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "amortlab/parallel.hpp"
#include "amortlab/parse.hpp"

namespace amortlab {

namespace {

SoundnessVerdict check_instance(const Instance& in, Model model) {
  if (!in.setup_ok) {
    SoundnessVerdict v;
    v.model = model;
    v.reason = "setup stuck: " + in.setup_error;
    return v;
  }
  return soundness_check(in.functions, in.heap, in.main, model);
}

SoundnessVerdict hard_error(Model model, const std::exception& err) {
  SoundnessVerdict v;
  v.model = model;
  v.verdict = Verdict::fail;
  v.reason = std::string("error: ") + err.what();
  return v;
}

}  // namespace

std::vector<SoundnessItem> random_soundness_suite(Model model, std::size_t count, std::uint64_t seed,
                                                  const GeneratorOptions& opts) {
  return parallel_map(count, [&](std::size_t i) {
    SoundnessItem item;
    item.index = i;
    item.seed = split_seed(seed, i);
    try {
      item.verdict = check_instance(instantiate(generate_program(model, item.seed, opts), model), model);
    } catch (const std::exception& err) {
      item.verdict = hard_error(model, err);
    }
    return item;
  });
}

std::vector<SoundnessItem> corpus_soundness_suite(Model model, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".aml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return parallel_map(files.size(), [&](std::size_t i) {
    SoundnessItem item;
    item.index = i;
    item.source = files[i].filename().string();
    try {
      std::ifstream in(files[i]);
      std::stringstream text;
      text << in.rdbuf();
      Program p = parse(text.str());
      item.verdict = soundness_check(p.functions, initial_heap(p, model), p.main, model);
    } catch (const StuckError& err) {
      item.verdict.model = model;
      item.verdict.reason = std::string("initial heap stuck: ") + err.what();
    } catch (const std::exception& err) {
      item.verdict = hard_error(model, err);
    }
    return item;
  });
}

SoundnessSummary summarize(Model model, const std::vector<SoundnessItem>& items) {
  SoundnessSummary s;
  s.model = model;
  for (const auto& item : items) s.add(item.verdict);
  return s;
}

GeneratorOptions persistence_generator_options() {
  GeneratorOptions opts;
  opts.underfund_rate = 0;
  opts.overspend_rate = 0;
  return opts;
}

std::vector<PersistenceItem> random_persistence_suite(Model model, std::size_t count, std::size_t action_budget,
                                                      std::uint64_t seed) {
  GeneratorOptions opts = persistence_generator_options();
  return parallel_map(count, [&](std::size_t i) {
    PersistenceItem item;
    item.index = i;
    item.program_seed = split_seed(seed, 2 * i);
    std::uint64_t trial_seed = split_seed(seed, 2 * i + 1);
    try {
      Instance in = instantiate(generate_program(model, item.program_seed, opts), model);
      if (!in.setup_ok) {
        item.verdict.model = model;
        item.verdict.seed = trial_seed;
        item.verdict.detail = "setup stuck: " + in.setup_error;
      } else {
        item.verdict = persistence_trial(in.functions, in.heap, in.main, model, action_budget, trial_seed);
      }
    } catch (const std::exception& err) {
      item.verdict.model = model;
      item.verdict.seed = trial_seed;
      item.verdict.verdict = TrialVerdict::fail;
      item.verdict.detail = std::string("error: ") + err.what();
    }
    return item;
  });
}

}  // namespace amortlab
