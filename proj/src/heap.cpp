#include "amortlab/heap.hpp"

#include <set>

#include "amortlab/parse.hpp"

namespace amortlab {

std::string_view model_name(Model m) {
  switch (m) {
    case Model::real: return "real";
    case Model::bankers: return "bankers";
    case Model::credit: return "credit";
    case Model::credit_inherit: return "credit-inherit";
    case Model::debit: return "debit";
    case Model::debit_inherit: return "debit-inherit";
    case Model::debit_unsound: return "debit-unsound";
  }
  return "?";
}

std::optional<Model> parse_model(std::string_view name) {
  for (Model m : {Model::real, Model::bankers, Model::credit, Model::credit_inherit, Model::debit,
                  Model::debit_inherit, Model::debit_unsound}) {
    if (model_name(m) == name) return m;
  }
  if (name == "R") return Model::real;
  if (name == "B") return Model::bankers;
  if (name == "C") return Model::credit;
  if (name == "CI") return Model::credit_inherit;
  if (name == "D") return Model::debit;
  if (name == "DI") return Model::debit_inherit;
  return std::nullopt;
}

bool is_debit(Model m) {
  return m == Model::debit || m == Model::debit_inherit || m == Model::debit_unsound;
}

bool is_credit(Model m) { return m == Model::credit || m == Model::credit_inherit; }

NegativePotential::NegativePotential(std::int64_t total)
    : HeapError("negative potential " + std::to_string(total)), total_(total) {}

bool equal(const Annotation& a, const Annotation& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<ann::Credits>(&a)) return x->n == std::get<ann::Credits>(b).n;
  if (const auto* x = std::get_if<ann::Heir>(&a)) return x->heir == std::get<ann::Heir>(b).heir;
  if (const auto* x = std::get_if<ann::Debit>(&a)) {
    const auto& y = std::get<ann::Debit>(b);
    return x->debits == y.debits && x->fn == y.fn && x->kreal == y.kreal && x->allocs == y.allocs &&
           equal(x->arg, y.arg);
  }
  return true;
}

bool equal(const Cell& a, const Cell& b) { return equal(a.value, b.value) && equal(a.ann, b.ann); }

const Cell* Heap::find(const Pointer& p) const {
  auto it = cells_.find(p);
  return it == cells_.end() ? nullptr : &it->second.cell;
}

void Heap::insert(const Pointer& p, Cell cell) {
  if (p.empty()) throw HeapError("cannot bind the empty pointer");
  if (cells_.count(p)) throw HeapError("pointer " + p.str() + " is already bound");
  record(p);
  std::uint64_t stamp = next_stamp_++;
  cells_.emplace(p, Slot{std::move(cell), stamp});
  order_.emplace(stamp, p);
  if (p.is_root() && p.last() >= next_root_) next_root_ = p.last() + 1;
}

void Heap::update(const Pointer& p, Cell cell) {
  auto it = cells_.find(p);
  if (it == cells_.end()) throw HeapError("pointer " + p.str() + " is not bound");
  record(p);
  it->second.cell = std::move(cell);
}

void Heap::remove(const Pointer& p) {
  auto it = cells_.find(p);
  if (it == cells_.end()) throw HeapError("pointer " + p.str() + " is not bound");
  record(p);
  order_.erase(it->second.stamp);
  cells_.erase(it);
}

void Heap::record(const Pointer& p) {
  if (!journal_) return;
  auto it = cells_.find(p);
  journal_->undo.emplace_back(p, it == cells_.end() ? std::nullopt : std::optional<Slot>(it->second));
}

void Heap::begin_journal() {
  if (journal_) throw HeapError("journal already open");
  journal_ = Journal{{}, next_stamp_, next_root_};
}

void Heap::commit_journal() { journal_.reset(); }

void Heap::rollback_journal() {
  if (!journal_) throw HeapError("no open journal");
  Journal j = std::move(*journal_);
  journal_.reset();
  for (auto it = j.undo.rbegin(); it != j.undo.rend(); ++it) {
    auto& [p, old] = *it;
    if (auto cur = cells_.find(p); cur != cells_.end()) {
      order_.erase(cur->second.stamp);
      cells_.erase(cur);
    }
    if (old) {
      order_.emplace(old->stamp, p);
      cells_.emplace(p, std::move(*old));
    }
  }
  next_stamp_ = j.next_stamp;
  next_root_ = j.next_root;
}

std::vector<Pointer> Heap::inserted_since(std::uint64_t mark) const {
  std::vector<Pointer> out;
  for (auto it = order_.lower_bound(mark); it != order_.end(); ++it) out.push_back(it->second);
  return out;
}

std::vector<Pointer> Heap::order() const {
  std::vector<Pointer> out;
  out.reserve(order_.size());
  for (const auto& [stamp, p] : order_) out.push_back(p);
  return out;
}

bool operator==(const Heap& a, const Heap& b) {
  if (a.cells_.size() != b.cells_.size()) return false;
  for (auto ia = a.cells_.begin(), ib = b.cells_.begin(); ia != a.cells_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !equal(ia->second.cell, ib->second.cell)) return false;
  }
  return true;
}

std::pair<Heap, Pointer> alloc(Heap h, HeapValue hv, Annotation ann) {
  std::vector<Pointer> inside;
  collect_pointers(hv, inside);
  for (const auto& p : inside) {
    if (!h.contains(p)) throw HeapError("open heap value: dangling pointer " + p.str());
  }
  Pointer p = h.reserve_root();
  h.insert(p, Cell{strip_split(hv), std::move(ann)});
  return {std::move(h), p};
}

void check_closed(const Heap& h) {
  h.for_each([&](const Pointer& at, const Cell& cell) {
    std::vector<Pointer> inside;
    collect_pointers(cell.value, inside);
    if (const auto* d = std::get_if<ann::Debit>(&cell.ann)) {
      collect_pointers(d->arg, inside);
      for (const auto& p : d->allocs) inside.push_back(p);
    }
    if (const auto* heir = std::get_if<ann::Heir>(&cell.ann)) inside.push_back(heir->heir);
    for (const auto& p : inside) {
      if (!h.contains(p)) throw HeapError("cell " + at.str() + " mentions unbound pointer " + p.str());
    }
  });
}

void check_well_formed(const Heap& h, Model m) {
  h.for_each([&](const Pointer& at, const Cell& cell) {
    bool is_lazy = std::holds_alternative<hv::Lazy>(cell.value);
    bool is_memo = std::holds_alternative<hv::Memo>(cell.value);
    bool ok = false;
    switch (m) {
      case Model::real:
        ok = std::holds_alternative<ann::None>(cell.ann);
        break;
      case Model::bankers:
        ok = std::holds_alternative<ann::Credits>(cell.ann);
        break;
      case Model::credit:
        ok = is_lazy ? std::holds_alternative<ann::Credits>(cell.ann)
                     : std::holds_alternative<ann::None>(cell.ann);
        break;
      case Model::credit_inherit:
        if (is_lazy) {
          ok = std::holds_alternative<ann::Credits>(cell.ann);
        } else if (is_memo) {
          ok = std::holds_alternative<ann::None>(cell.ann) || std::holds_alternative<ann::Heir>(cell.ann);
        } else {
          ok = std::holds_alternative<ann::None>(cell.ann);
        }
        break;
      case Model::debit:
      case Model::debit_inherit:
      case Model::debit_unsound:
        if (is_memo) {
          ok = std::holds_alternative<ann::None>(cell.ann) || std::holds_alternative<ann::Debit>(cell.ann);
        } else {
          ok = !is_lazy && std::holds_alternative<ann::None>(cell.ann);
        }
        break;
    }
    if (!ok) {
      throw HeapError("cell " + at.str() + " has annotation " + describe(cell.ann) + " illegal for model " +
                      std::string(model_name(m)));
    }
  });
}

Heap erase(const Heap& h, Model m) {
  if (m == Model::real) return h;
  std::set<Pointer> removed;
  if (is_debit(m)) {
    h.for_each([&](const Pointer& at, const Cell& cell) {
      if (const auto* d = std::get_if<ann::Debit>(&cell.ann)) {
        for (const auto& p : d->allocs) {
          if (!h.contains(p)) {
            throw HeapError("corrupt debit record at " + at.str() + ": recorded pointer " + p.str() +
                            " is absent");
          }
          removed.insert(p);
        }
      }
    });
  }
  Heap out;
  h.for_each([&](const Pointer& at, const Cell& cell) {
    if (removed.count(at)) return;
    if (const auto* d = std::get_if<ann::Debit>(&cell.ann)) {
      out.insert(at, Cell{hv::Lazy{d->fn, d->arg, std::nullopt}, ann::None{}});
    } else {
      out.insert(at, Cell{cell.value, ann::None{}});
    }
  });
  out.set_next_root(h.next_root());
  return out;
}

std::int64_t potential_signed(const Heap& h, Model m) {
  std::int64_t total = 0;
  h.for_each_unordered([&](const Pointer&, const Cell& cell) {
    switch (m) {
      case Model::real:
        break;
      case Model::bankers:
        if (const auto* c = std::get_if<ann::Credits>(&cell.ann)) total += static_cast<std::int64_t>(c->n);
        break;
      case Model::credit:
      case Model::credit_inherit:
        if (std::holds_alternative<hv::Lazy>(cell.value)) {
          if (const auto* c = std::get_if<ann::Credits>(&cell.ann)) total += static_cast<std::int64_t>(c->n);
        }
        break;
      case Model::debit:
      case Model::debit_inherit:
      case Model::debit_unsound:
        if (const auto* d = std::get_if<ann::Debit>(&cell.ann)) {
          total += static_cast<std::int64_t>(d->kreal) - d->debits;
        }
        break;
    }
  });
  return total;
}

std::uint64_t potential(const Heap& h, Model m) {
  std::int64_t total = potential_signed(h, m);
  if (total < 0) throw NegativePotential(total);
  return static_cast<std::uint64_t>(total);
}

Annotation fresh_annotation(Model m, const HeapValue& hv) {
  if (m == Model::bankers) return ann::Credits{0};
  if (is_credit(m) && std::holds_alternative<hv::Lazy>(hv)) return ann::Credits{0};
  return ann::None{};
}

HeapValue strip_split(const HeapValue& hv) {
  if (const auto* l = std::get_if<hv::Lazy>(&hv)) {
    if (l->split) return hv::Lazy{l->fn, l->arg, std::nullopt};
  }
  return hv;
}

std::string describe(const Annotation& a) {
  if (const auto* c = std::get_if<ann::Credits>(&a)) return "credits " + std::to_string(c->n);
  if (const auto* x = std::get_if<ann::Heir>(&a)) return "heir " + pointer_display(x->heir);
  if (const auto* d = std::get_if<ann::Debit>(&a)) {
    return "debits " + std::to_string(d->debits) + " of (" + d->fn + " " + print(d->arg) + ") kreal " +
           std::to_string(d->kreal);
  }
  return "none";
}

std::string describe(const Heap& h) {
  std::string out;
  h.for_each([&](const Pointer& p, const Cell& cell) {
    out += pointer_display(p) + " -> " + print(cell.value) + " [" + describe(cell.ann) + "]\n";
  });
  return out;
}

}  // namespace amortlab
