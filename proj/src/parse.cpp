#include "amortlab/parse.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <vector>

namespace amortlab {

ParseError::ParseError(const std::string& message, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

struct SExpr {
  bool is_atom = false;
  std::string atom;
  std::vector<SExpr> items;
  int line = 1;
  int column = 1;
};

[[noreturn]] void fail(const SExpr& at, const std::string& message) {
  throw ParseError(message, at.line, at.column);
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::vector<SExpr> read_all() {
    std::vector<SExpr> out;
    skip_space();
    while (pos_ < text_.size()) {
      out.push_back(read());
      skip_space();
    }
    return out;
  }

  const std::set<std::string>& atoms() const { return atoms_; }

 private:
  SExpr read() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", line_, column_);
    SExpr node;
    node.line = line_;
    node.column = column_;
    char c = text_[pos_];
    if (c == ')') throw ParseError("unexpected ')'", line_, column_);
    if (c == '(') {
      advance();
      while (true) {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError("unclosed '('", node.line, node.column);
        if (text_[pos_] == ')') {
          advance();
          break;
        }
        node.items.push_back(read());
      }
      return node;
    }
    node.is_atom = true;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';') break;
      node.atom += d;
      advance();
    }
    atoms_.insert(node.atom);
    return node;
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  std::set<std::string> atoms_;
};

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "unit", "inl",  "inr",   "pair",  "lam",    "fold",  "lazy",  "lazy!",
      "memo", "let",  "case",  "split", "app",    "call",  "unfold", "force",
      "save", "spend", "pass", "def",   "main",   "heap"};
  return k;
}

bool is_number(const std::string& s) {
  std::size_t start = (!s.empty() && s[0] == '-') ? 1 : 0;
  if (start == s.size()) return false;
  for (std::size_t i = start; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

bool is_identifier(const std::string& s) {
  if (s.empty() || keywords().count(s) || is_number(s)) return false;
  if (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '@') return false;
  return true;
}

using Bindings = std::vector<std::pair<std::string, ExprPtr>>;

class Converter {
 public:
  explicit Converter(const std::set<std::string>& atoms) : atoms_(atoms) {}

  Program program(const std::vector<SExpr>& forms) {
    Program p;
    const SExpr* main_form = nullptr;
    const SExpr* heap_form = nullptr;
    std::vector<const SExpr*> defs;
    for (const auto& form : forms) {
      if (form.is_atom || form.items.empty() || !form.items[0].is_atom) {
        fail(form, "expected a top-level form");
      }
      const std::string& head = form.items[0].atom;
      if (head == "def") {
        defs.push_back(&form);
      } else if (head == "main") {
        if (main_form) fail(form, "duplicate main");
        main_form = &form;
      } else if (head == "heap") {
        if (heap_form) fail(form, "duplicate heap block");
        heap_form = &form;
      } else {
        fail(form, "unknown top-level form '" + head + "'");
      }
    }
    if (!main_form) throw ParseError("missing main", 1, 1);

    if (heap_form) {
      for (std::size_t i = 1; i < heap_form->items.size(); ++i) {
        const SExpr& entry = heap_form->items[i];
        if (entry.is_atom || entry.items.size() != 3 || !entry.items[0].is_atom) {
          fail(entry, "heap entry must be (name count heap-value)");
        }
        const std::string& name = entry.items[0].atom;
        if (!is_identifier(name)) fail(entry.items[0], "invalid heap name '" + name + "'");
        if (heap_names_.count(name)) fail(entry.items[0], "duplicate heap name '" + name + "'");
        heap_names_[name] = Pointer::root(static_cast<std::uint32_t>(i - 1));
      }
      allow_heap_names_ = true;
      for (std::size_t i = 1; i < heap_form->items.size(); ++i) {
        const SExpr& entry = heap_form->items[i];
        HeapEntry h;
        h.name = entry.items[0].atom;
        h.count = signed_count(entry.items[1]);
        h.value = heap_value(entry.items[2]);
        std::vector<Pointer> refs;
        collect_pointers(h.value, refs);
        for (const auto& q : refs) {
          if (q.last() + 1 >= i) fail(entry.items[2], "heap entry '" + h.name + "' refers to a later or its own entry");
        }
        p.heap.push_back(std::move(h));
      }
    }

    for (const SExpr* form : defs) {
      if (form->items.size() != 4) fail(*form, "def expects (def F x e)");
      std::string fname = identifier(form->items[1]);
      if (p.functions.count(fname)) fail(form->items[1], "duplicate function '" + fname + "'");
      std::string param = identifier(form->items[2]);
      allow_heap_names_ = false;
      scope_.assign({param});
      ExprPtr body = expr(form->items[3]);
      scope_.clear();
      p.functions[fname] = FuncDef{param, body};
    }

    if (main_form->items.size() != 2) fail(*main_form, "main expects (main e)");
    allow_heap_names_ = true;
    p.main = expr(main_form->items[1]);

    for (const auto& [name, at] : called_) {
      if (!p.functions.count(name)) throw ParseError("unknown function '" + name + "'", at.first, at.second);
    }
    return p;
  }

  ExprPtr standalone(const SExpr& s) {
    allow_heap_names_ = false;
    allow_free_ = true;
    return expr(s);
  }

  const std::map<std::string, std::pair<int, int>>& called() const { return called_; }

 private:
  std::string identifier(const SExpr& s) {
    if (!s.is_atom || !is_identifier(s.atom)) fail(s, "expected an identifier");
    return s.atom;
  }

  std::string function_name(const SExpr& s) {
    std::string name = identifier(s);
    called_.emplace(name, std::make_pair(s.line, s.column));
    return name;
  }

  std::uint64_t count(const SExpr& s) {
    if (!s.is_atom || !is_number(s.atom) || s.atom[0] == '-') fail(s, "expected a nonnegative integer");
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.atom.data(), s.atom.data() + s.atom.size(), out);
    if (ec != std::errc()) fail(s, "integer out of range");
    return out;
  }

  std::int64_t signed_count(const SExpr& s) {
    if (!s.is_atom || !is_number(s.atom)) fail(s, "expected an integer");
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.atom.data(), s.atom.data() + s.atom.size(), out);
    if (ec != std::errc()) fail(s, "integer out of range");
    return out;
  }

  static const std::string* head_of(const SExpr& s) {
    if (s.is_atom || s.items.empty() || !s.items[0].is_atom) return nullptr;
    return &s.items[0].atom;
  }

  void arity(const SExpr& s, std::size_t n) {
    if (s.items.size() != n) {
      fail(s, "'" + s.items[0].atom + "' expects " + std::to_string(n - 1) + " operands");
    }
  }

  std::string fresh() {
    while (true) {
      std::string name = "$" + std::to_string(++fresh_counter_);
      if (!atoms_.count(name)) return name;
    }
  }

  bool in_scope(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it) {
      if (*it == name) return true;
    }
    return false;
  }

  ExprPtr under(const std::vector<std::string>& names, const SExpr& body) {
    for (const auto& n : names) {
      if (allow_heap_names_ && heap_names_.count(n)) fail(body, "binder '" + n + "' shadows a heap name");
      scope_.push_back(n);
    }
    ExprPtr out = expr(body);
    scope_.resize(scope_.size() - names.size());
    return out;
  }

  // `pending` is null where only a syntactic value is allowed.
  ValuePtr value(const SExpr& s, Bindings* pending) {
    if (s.is_atom) {
      if (s.atom == "unit") return build::unit();
      if (!is_identifier(s.atom)) fail(s, "expected a value, got '" + s.atom + "'");
      if (!in_scope(s.atom)) {
        if (allow_heap_names_) {
          auto it = heap_names_.find(s.atom);
          if (it != heap_names_.end()) return build::ptr(it->second);
        }
        if (!allow_free_) fail(s, "unbound variable '" + s.atom + "'");
      }
      return build::var(s.atom);
    }
    const std::string* head = head_of(s);
    if (!head) fail(s, "expected a value");
    if (*head == "inl" || *head == "inr") {
      arity(s, 2);
      ValuePtr inner = value(s.items[1], pending);
      return *head == "inl" ? build::inl(inner) : build::inr(inner);
    }
    if (*head == "pair") {
      arity(s, 3);
      ValuePtr a = value(s.items[1], pending);
      ValuePtr b = value(s.items[2], pending);
      return build::pair(a, b);
    }
    if (*head == "lam") {
      arity(s, 3);
      std::string param = identifier(s.items[1]);
      return build::lam(param, under({param}, s.items[2]));
    }
    if (!pending) fail(s, "value-position violation: '" + *head + "' is not a value");
    ExprPtr bound = expr(s);
    std::string name = fresh();
    pending->emplace_back(name, bound);
    return build::var(name);
  }

  HeapValue heap_value(const SExpr& s) {
    const std::string* head = head_of(s);
    if (!head) fail(s, "expected a heap value");
    if (*head == "fold") {
      arity(s, 2);
      return hv::Fold{value(s.items[1], nullptr)};
    }
    if (*head == "memo") {
      arity(s, 2);
      return hv::Memo{value(s.items[1], nullptr)};
    }
    if (*head == "lazy") {
      arity(s, 3);
      std::string fn = function_name(s.items[1]);
      return hv::Lazy{fn, value(s.items[2], nullptr), std::nullopt};
    }
    if (*head == "lazy!") {
      arity(s, 4);
      std::uint64_t k1 = count(s.items[1]);
      std::string fn = function_name(s.items[2]);
      return hv::Lazy{fn, value(s.items[3], nullptr), k1};
    }
    fail(s, "expected a heap value");
  }

  ExprPtr expr(const SExpr& s) {
    Bindings pending;
    ExprPtr out = construct(s, pending);
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
      out = build::let(it->first, it->second, out);
    }
    return out;
  }

  ExprPtr construct(const SExpr& s, Bindings& pending) {
    const std::string* head = head_of(s);
    if (!head || *head == "inl" || *head == "inr" || *head == "pair" || *head == "lam") {
      return build::ret(value(s, &pending));
    }
    const std::string& h = *head;
    if (h == "fold") {
      arity(s, 2);
      return build::fold(value(s.items[1], &pending));
    }
    if (h == "memo") {
      arity(s, 2);
      return build::memo(value(s.items[1], &pending));
    }
    if (h == "lazy") {
      arity(s, 3);
      std::string fn = function_name(s.items[1]);
      return build::lazy(fn, value(s.items[2], &pending));
    }
    if (h == "lazy!") {
      arity(s, 4);
      std::uint64_t k1 = count(s.items[1]);
      std::string fn = function_name(s.items[2]);
      return build::lazy_split(k1, fn, value(s.items[3], &pending));
    }
    if (h == "let") {
      arity(s, 4);
      std::string name = identifier(s.items[1]);
      ExprPtr bound = expr(s.items[2]);
      return build::let(name, bound, under({name}, s.items[3]));
    }
    if (h == "case") {
      arity(s, 4);
      ValuePtr scrutinee = value(s.items[1], &pending);
      auto branch = [&](const SExpr& b, const char* tag) {
        const std::string* bh = head_of(b);
        if (!bh || *bh != tag || b.items.size() != 3) {
          fail(b, std::string("expected (") + tag + " x e) branch");
        }
        std::string name = identifier(b.items[1]);
        return std::make_pair(name, under({name}, b.items[2]));
      };
      auto [ln, left] = branch(s.items[2], "inl");
      auto [rn, right] = branch(s.items[3], "inr");
      return build::case_of(scrutinee, ln, left, rn, right);
    }
    if (h == "split") {
      arity(s, 4);
      const SExpr& names = s.items[1];
      if (names.is_atom || names.items.size() != 2) fail(names, "split expects binders (x y)");
      std::string x = identifier(names.items[0]);
      std::string y = identifier(names.items[1]);
      if (x == y) fail(names, "split binders must be distinct");
      ValuePtr pair = value(s.items[2], &pending);
      return build::split(x, y, pair, under({x, y}, s.items[3]));
    }
    if (h == "app") {
      arity(s, 3);
      ValuePtr fn = value(s.items[1], &pending);
      ValuePtr arg = value(s.items[2], &pending);
      return build::app(fn, arg);
    }
    if (h == "call") {
      arity(s, 3);
      std::string fn = function_name(s.items[1]);
      return build::call(fn, value(s.items[2], &pending));
    }
    if (h == "unfold") {
      arity(s, 2);
      return build::unfold(value(s.items[1], &pending));
    }
    if (h == "force") {
      arity(s, 2);
      return build::force(value(s.items[1], &pending));
    }
    if (h == "save") {
      arity(s, 3);
      std::uint64_t n = count(s.items[1]);
      return build::save(n, value(s.items[2], &pending));
    }
    if (h == "spend") {
      arity(s, 4);
      std::uint64_t n = count(s.items[1]);
      ValuePtr target = value(s.items[2], &pending);
      return build::spend(n, target, expr(s.items[3]));
    }
    if (h == "pass") {
      arity(s, 2);
      return build::pass(value(s.items[1], &pending));
    }
    fail(s, "unknown form '" + h + "'");
  }

  const std::set<std::string>& atoms_;
  std::map<std::string, Pointer> heap_names_;
  std::map<std::string, std::pair<int, int>> called_;
  std::vector<std::string> scope_;
  bool allow_heap_names_ = false;
  bool allow_free_ = false;
  std::uint64_t fresh_counter_ = 0;
};

// ---------------------------------------------------------------------------
// Printer

class Printer {
 public:
  explicit Printer(const PointerNamer& names) : names_(names) {}

  void value(const ValuePtr& v) {
    if (const auto* x = v->as<val::Var>()) {
      out += x->name;
    } else if (const auto* x = v->as<val::Ptr>()) {
      out += names_(x->ptr);
    } else if (v->as<val::Unit>()) {
      out += "unit";
    } else if (const auto* x = v->as<val::Inl>()) {
      out += "(inl ";
      value(x->inner);
      out += ")";
    } else if (const auto* x = v->as<val::Inr>()) {
      out += "(inr ";
      value(x->inner);
      out += ")";
    } else if (const auto* x = v->as<val::Pair>()) {
      out += "(pair ";
      value(x->first);
      out += " ";
      value(x->second);
      out += ")";
    } else if (const auto* x = v->as<val::Lam>()) {
      out += "(lam " + x->param + " ";
      expr(x->body);
      out += ")";
    }
  }

  void heap_value(const HeapValue& h) {
    if (const auto* x = std::get_if<hv::Fold>(&h)) {
      out += "(fold ";
      value(x->value);
    } else if (const auto* x = std::get_if<hv::Memo>(&h)) {
      out += "(memo ";
      value(x->value);
    } else {
      const auto& l = std::get<hv::Lazy>(h);
      if (l.split) {
        out += "(lazy! " + std::to_string(*l.split) + " " + l.fn + " ";
      } else {
        out += "(lazy " + l.fn + " ";
      }
      value(l.arg);
    }
    out += ")";
  }

  void expr(const ExprPtr& e) {
    if (const auto* x = e->as<ex::Return>()) {
      value(x->value);
    } else if (const auto* x = e->as<ex::Alloc>()) {
      heap_value(x->value);
    } else if (const auto* x = e->as<ex::Let>()) {
      out += "(let " + x->name + " ";
      expr(x->bound);
      out += " ";
      expr(x->body);
      out += ")";
    } else if (const auto* x = e->as<ex::Case>()) {
      out += "(case ";
      value(x->scrutinee);
      out += " (inl " + x->left_name + " ";
      expr(x->left);
      out += ") (inr " + x->right_name + " ";
      expr(x->right);
      out += "))";
    } else if (const auto* x = e->as<ex::Split>()) {
      out += "(split (" + x->first + " " + x->second + ") ";
      value(x->pair);
      out += " ";
      expr(x->body);
      out += ")";
    } else if (const auto* x = e->as<ex::App>()) {
      out += "(app ";
      value(x->fn);
      out += " ";
      value(x->arg);
      out += ")";
    } else if (const auto* x = e->as<ex::Call>()) {
      out += "(call " + x->fn + " ";
      value(x->arg);
      out += ")";
    } else if (const auto* x = e->as<ex::Unfold>()) {
      out += "(unfold ";
      value(x->target);
      out += ")";
    } else if (const auto* x = e->as<ex::Force>()) {
      out += "(force ";
      value(x->target);
      out += ")";
    } else if (const auto* x = e->as<ex::Save>()) {
      out += "(save " + std::to_string(x->amount) + " ";
      value(x->target);
      out += ")";
    } else if (const auto* x = e->as<ex::Spend>()) {
      out += "(spend " + std::to_string(x->amount) + " ";
      value(x->target);
      out += " ";
      expr(x->body);
      out += ")";
    } else if (const auto* x = e->as<ex::Pass>()) {
      out += "(pass ";
      value(x->heir);
      out += ")";
    }
  }

  std::string out;

 private:
  const PointerNamer& names_;
};

}  // namespace

Program parse(std::string_view text) {
  Reader reader(text);
  auto forms = reader.read_all();
  Converter converter(reader.atoms());
  return converter.program(forms);
}

ExprPtr parse_expr(std::string_view text) {
  Reader reader(text);
  auto forms = reader.read_all();
  if (forms.size() != 1) throw ParseError("expected exactly one expression", 1, 1);
  Converter converter(reader.atoms());
  return converter.standalone(forms[0]);
}

std::string pointer_display(const Pointer& p) { return "@" + p.str(); }

std::string print(const ValuePtr& v, const PointerNamer& names) {
  Printer p(names);
  p.value(v);
  return p.out;
}

std::string print(const ExprPtr& e, const PointerNamer& names) {
  Printer p(names);
  p.expr(e);
  return p.out;
}

std::string print(const HeapValue& h, const PointerNamer& names) {
  Printer p(names);
  p.heap_value(h);
  return p.out;
}

std::string print(const Program& program) {
  PointerNamer names = [&](const Pointer& ptr) -> std::string {
    if (ptr.is_root() && ptr.last() < program.heap.size()) return program.heap[ptr.last()].name;
    return pointer_display(ptr);
  };
  std::string out;
  for (const auto& [name, def] : program.functions) {
    out += "(def " + name + " " + def.param + " " + print(def.body, names) + ")\n";
  }
  if (!program.heap.empty()) {
    out += "(heap";
    for (const auto& entry : program.heap) {
      out += "\n  (" + entry.name + " " + std::to_string(entry.count) + " " +
             print(entry.value, names) + ")";
    }
    out += ")\n";
  }
  out += "(main " + print(program.main, names) + ")\n";
  return out;
}

}  // namespace amortlab
