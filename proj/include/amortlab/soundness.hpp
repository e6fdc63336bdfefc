#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "amortlab/eval.hpp"
#include "amortlab/heap.hpp"
#include "amortlab/syntax.hpp"

namespace amortlab {

enum class Verdict { pass, fail, inconclusive };

std::string_view verdict_name(Verdict v);

struct SoundnessVerdict {
  Model model = Model::real;
  Verdict verdict = Verdict::inconclusive;
  std::string reason;
  Cost model_cost;
  std::uint64_t n = 0;  // k + k' of the model run
  std::uint64_t k_real = 0;
  std::int64_t phi_before = 0;
  std::int64_t phi_after = 0;
  // n - (k_real + phi_after - phi_before); negative means the inequality fails.
  std::int64_t slack = 0;
  bool value_equal = false;
  bool heap_equal = false;
};

// Runs (h, e) under the model and (erase(h), e) under the real semantics.
// PASS iff the values agree, erase(D) equals the real final heap, the final
// potential is non-negative and k_real + phi(D) - phi(G) <= n. A stuck model
// run is INCONCLUSIVE; a stuck real run throws EvalError.
SoundnessVerdict soundness_check(const FuncEnv& env, const Heap& h, const ExprPtr& e, Model model);

struct SoundnessSummary {
  Model model = Model::real;
  std::uint64_t programs = 0;
  std::uint64_t pass = 0;
  std::uint64_t fail = 0;
  std::uint64_t inconclusive = 0;
  std::int64_t max_slack = 0;

  void add(const SoundnessVerdict& v);
  static std::string csv_header();
  std::string csv_row() const;
};

}  // namespace amortlab
