#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "amortlab/pointer.hpp"
#include "amortlab/syntax.hpp"

namespace amortlab {

enum class Model { real, bankers, credit, credit_inherit, debit, debit_inherit, debit_unsound };

std::string_view model_name(Model m);
std::optional<Model> parse_model(std::string_view name);
bool is_debit(Model m);
bool is_credit(Model m);

namespace ann {
struct None {};
struct Credits { std::uint64_t n = 0; };
// Credit inheritance: a memo cell that designated an heir when it was forced.
struct Heir { Pointer heir; };
// Debit models: an unaccessed memo cell. `allocs` are the cells its
// speculation allocated; `kreal` is the real cost of `fn arg` at creation.
struct Debit {
  std::int64_t debits = 0;
  std::string fn;
  ValuePtr arg;
  std::vector<Pointer> allocs;
  std::uint64_t kreal = 0;
};
}  // namespace ann

using Annotation = std::variant<ann::None, ann::Credits, ann::Heir, ann::Debit>;

bool equal(const Annotation& a, const Annotation& b);

struct Cell {
  HeapValue value;
  Annotation ann;
};

bool equal(const Cell& a, const Cell& b);

class HeapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NegativePotential : public HeapError {
 public:
  explicit NegativePotential(std::int64_t total);
  std::int64_t total() const { return total_; }

 private:
  std::int64_t total_;
};

// Insertion-ordered pointer -> cell map plus the root allocation counter.
// Copying a heap yields an independent value.
class Heap {
 public:
  const Cell* find(const Pointer& p) const;
  bool contains(const Pointer& p) const { return cells_.count(p) > 0; }
  std::size_t size() const { return cells_.size(); }
  bool empty() const { return cells_.empty(); }

  // Throws HeapError if `p` is already bound. Inserting a root at or past
  // the counter advances it.
  void insert(const Pointer& p, Cell cell);
  // Replaces the cell in place, keeping its position.
  void update(const Pointer& p, Cell cell);
  void remove(const Pointer& p);

  Pointer reserve_root() { return Pointer::root(next_root_++); }
  std::uint32_t next_root() const { return next_root_; }
  void set_next_root(std::uint32_t n) { next_root_ = n; }

  // Insertion stamps delimit the cells added by a sub-evaluation.
  std::uint64_t watermark() const { return next_stamp_; }
  std::vector<Pointer> inserted_since(std::uint64_t mark) const;

  std::vector<Pointer> order() const;

  // Undo log. While open, insert/update/remove are recorded so that
  // rollback_journal() restores the heap (and its counters) exactly.
  void begin_journal();
  void commit_journal();
  void rollback_journal();
  bool journaling() const { return journal_.has_value(); }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& [stamp, p] : order_) f(p, cells_.at(p).cell);
  }
  // Pointer order; cheaper when the visit order does not matter.
  template <class F>
  void for_each_unordered(F&& f) const {
    for (const auto& [p, slot] : cells_) f(p, slot.cell);
  }

  // Same domain and equal cells; order and counter are ignored.
  friend bool operator==(const Heap& a, const Heap& b);

 private:
  struct Slot {
    Cell cell;
    std::uint64_t stamp;
  };
  struct Journal {
    std::vector<std::pair<Pointer, std::optional<Slot>>> undo;
    std::uint64_t next_stamp = 0;
    std::uint32_t next_root = 0;
  };
  void record(const Pointer& p);

  std::map<Pointer, Slot> cells_;
  std::map<std::uint64_t, Pointer> order_;
  std::uint64_t next_stamp_ = 0;
  std::uint32_t next_root_ = 0;
  std::optional<Journal> journal_;
};

// Allocates a fresh root cell. Throws HeapError if `hv` mentions a pointer
// outside the heap.
std::pair<Heap, Pointer> alloc(Heap h, HeapValue hv, Annotation ann = ann::None{});

// Throws HeapError naming the first pointer inside a stored value that is
// not in the domain.
void check_closed(const Heap& h);

// Throws HeapError if an annotation is not legal for the model.
void check_well_formed(const Heap& h, Model m);

Heap erase(const Heap& h, Model m);

std::int64_t potential_signed(const Heap& h, Model m);
// Throws NegativePotential instead of clamping.
std::uint64_t potential(const Heap& h, Model m);

// Annotation carried by a freshly allocated cell under the model.
Annotation fresh_annotation(Model m, const HeapValue& hv);

HeapValue strip_split(const HeapValue& hv);

std::string describe(const Annotation& a);
std::string describe(const Heap& h);

}  // namespace amortlab
