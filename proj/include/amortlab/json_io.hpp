#pragma once

#include <json.hpp>

#include "amortlab/accessibility.hpp"
#include "amortlab/eval.hpp"
#include "amortlab/heap.hpp"
#include "amortlab/soundness.hpp"

namespace amortlab {

// Array of {ptr, hv, ann} in insertion order. ann is "none", {"credits": n},
// {"heir": ptr} or {"debits", "func", "arg", "allocs", "kreal"}.
nlohmann::json heap_json(const Heap& h);
nlohmann::json annotation_json(const Annotation& a);
nlohmann::json trace_row_json(const TraceRow& row);
nlohmann::json outcome_json(const EvalOutcome& out, Model model, std::int64_t phi_before);
nlohmann::json soundness_json(const SoundnessVerdict& v);
// {model, seed, actions, n, k, value_equal, refines, verdict, detail}
nlohmann::json persistence_json(const PersistenceVerdict& v);

}  // namespace amortlab
