#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "amortlab/accessibility.hpp"
#include "amortlab/random_program.hpp"
#include "amortlab/soundness.hpp"

namespace amortlab {

struct SoundnessItem {
  std::uint64_t index = 0;
  std::uint64_t seed = 0;
  std::string source;  // file name for corpus items
  SoundnessVerdict verdict;
};

// Item i uses the program generated from split_seed(seed, i). Hard errors
// become FAIL rows.
std::vector<SoundnessItem> random_soundness_suite(Model model, std::size_t count, std::uint64_t seed,
                                                  const GeneratorOptions& opts = {});
// Every .aml file in dir, in name order.
std::vector<SoundnessItem> corpus_soundness_suite(Model model, const std::filesystem::path& dir);

SoundnessSummary summarize(Model model, const std::vector<SoundnessItem>& items);

struct PersistenceItem {
  std::uint64_t index = 0;
  std::uint64_t program_seed = 0;
  PersistenceVerdict verdict;
};

// Trials on generated programs whose forces are fully funded, so that a
// stuck first run is rare. Hard errors become FAIL rows.
std::vector<PersistenceItem> random_persistence_suite(Model model, std::size_t count, std::size_t action_budget,
                                                      std::uint64_t seed);

GeneratorOptions persistence_generator_options();

}  // namespace amortlab
