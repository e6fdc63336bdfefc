#include "amortlab/soundness.hpp"

#include <algorithm>

namespace amortlab {

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

SoundnessVerdict soundness_check(const FuncEnv& env, const Heap& h, const ExprPtr& e, Model model) {
  SoundnessVerdict v;
  v.model = model;
  v.phi_before = potential_signed(h, model);

  EvalOutcome m;
  try {
    m = evaluate(env, h, e, model);
  } catch (const StuckError& err) {
    v.reason = std::string("model run stuck: ") + err.what();
    return v;
  }
  EvalOutcome r;
  try {
    r = eval_real(env, erase(h, model), e);
  } catch (const StuckError& err) {
    throw EvalError(std::string("real run stuck: ") + err.what());
  }

  v.model_cost = m.cost;
  v.n = m.cost.total();
  v.k_real = r.cost.k;
  v.phi_after = potential_signed(m.heap, model);
  v.value_equal = equal(m.value, r.value);
  v.heap_equal = erase(m.heap, model) == r.heap;
  v.slack = static_cast<std::int64_t>(v.n) -
            (static_cast<std::int64_t>(v.k_real) + v.phi_after - v.phi_before);

  if (!v.value_equal) {
    v.reason = "values differ";
  } else if (!v.heap_equal) {
    v.reason = "erased heap differs from the real heap";
  } else if (v.phi_after < 0) {
    v.reason = "negative potential " + std::to_string(v.phi_after);
  } else if (v.slack < 0) {
    v.reason = "real cost exceeds the bound by " + std::to_string(-v.slack);
  } else {
    v.verdict = Verdict::pass;
    return v;
  }
  v.verdict = Verdict::fail;
  return v;
}

void SoundnessSummary::add(const SoundnessVerdict& v) {
  ++programs;
  switch (v.verdict) {
    case Verdict::pass:
      ++pass;
      max_slack = std::max(max_slack, v.slack);
      break;
    case Verdict::fail: ++fail; break;
    case Verdict::inconclusive: ++inconclusive; break;
  }
}

std::string SoundnessSummary::csv_header() { return "model,programs,pass,fail,inconclusive,max_slack\n"; }

std::string SoundnessSummary::csv_row() const {
  return std::string(model_name(model)) + "," + std::to_string(programs) + "," + std::to_string(pass) + "," +
         std::to_string(fail) + "," + std::to_string(inconclusive) + "," + std::to_string(max_slack) + "\n";
}

}  // namespace amortlab
