#include "amortlab/json_io.hpp"

#include "amortlab/parse.hpp"

namespace amortlab {

using nlohmann::json;

namespace {
json cost_json(const Cost& c) { return json{{"k", c.k}, {"kprime", c.kprime}}; }
}  // namespace

json annotation_json(const Annotation& a) {
  if (const auto* c = std::get_if<ann::Credits>(&a)) return json{{"credits", c->n}};
  if (const auto* h = std::get_if<ann::Heir>(&a)) return json{{"heir", pointer_display(h->heir)}};
  if (const auto* d = std::get_if<ann::Debit>(&a)) {
    json allocs = json::array();
    for (const auto& p : d->allocs) allocs.push_back(pointer_display(p));
    return json{{"debits", d->debits}, {"func", d->fn}, {"arg", print(d->arg)}, {"allocs", allocs}, {"kreal", d->kreal}};
  }
  return "none";
}

json heap_json(const Heap& h) {
  json out = json::array();
  h.for_each([&](const Pointer& p, const Cell& c) {
    out.push_back(json{{"ptr", pointer_display(p)}, {"hv", print(c.value)}, {"ann", annotation_json(c.ann)}});
  });
  return out;
}

json trace_row_json(const TraceRow& r) {
  json j{{"rule", r.rule}, {"cost_delta", r.cost_delta}, {"expr_digest", r.expr_digest}, {"heap_size", r.heap_size}};
  if (r.credits) j["credits"] = *r.credits;
  if (r.credits_before) j["credits_before"] = *r.credits_before;
  if (r.credits_after) j["credits_after"] = *r.credits_after;
  if (r.heir) j["heir"] = "@" + *r.heir;
  if (r.debits_before) j["debits_before"] = *r.debits_before;
  if (r.debits_after) j["debits_after"] = *r.debits_after;
  if (r.k) j["k"] = *r.k;
  if (r.kprime) j["kprime"] = *r.kprime;
  return j;
}

json outcome_json(const EvalOutcome& out, Model model, std::int64_t phi_before) {
  return json{{"model", model_name(model)},
              {"k", out.cost.k},
              {"kprime", out.cost.kprime},
              {"value", print(out.value)},
              {"phi_before", phi_before},
              {"phi_after", potential_signed(out.heap, model)},
              {"heap", heap_json(out.heap)}};
}

json soundness_json(const SoundnessVerdict& v) {
  return json{{"model", model_name(v.model)},
              {"verdict", verdict_name(v.verdict)},
              {"reason", v.reason},
              {"cost", cost_json(v.model_cost)},
              {"n", v.n},
              {"k_real", v.k_real},
              {"phi_before", v.phi_before},
              {"phi_after", v.phi_after},
              {"slack", v.slack},
              {"value_equal", v.value_equal},
              {"heap_equal", v.heap_equal}};
}

json persistence_json(const PersistenceVerdict& v) {
  json actions = json::array();
  for (const auto& a : v.actions) actions.push_back(describe(a));
  return json{{"model", model_name(v.model)},
              {"seed", v.seed},
              {"actions", actions},
              {"n", cost_json(v.n)},
              {"k", v.k ? cost_json(*v.k) : json(nullptr)},
              {"value_equal", v.value_equal},
              {"refines", v.refines},
              {"verdict", trial_verdict_name(v.verdict)},
              {"detail", v.detail}};
}

}  // namespace amortlab
