#include "pta/ir.hpp"

#include "pta/graph.hpp"

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace pta {

const char *opcode_name(Opcode op) {
  switch (op) {
    case Opcode::Alloc: return "alloc";
    case Opcode::Addr: return "addr";
    case Opcode::Copy: return "copy";
    case Opcode::Load: return "load";
    case Opcode::Store: return "store";
    case Opcode::Field: return "field";
    case Opcode::Call: return "call";
    case Opcode::ICall: return "icall";
    case Opcode::Ret: return "ret";
    case Opcode::Br: return "br";
  }
  return "?";
}

std::string Diagnostic::str() const {
  std::ostringstream os;
  os << line << ":" << column << ": " << (is_error() ? "error" : "warning") << ": " << message;
  return os.str();
}

//===----------------------------------------------------------------------===//
// PointerModule tables
//===----------------------------------------------------------------------===//

void PointerModule::finalize() {
  fn_index_.clear();
  global_index_.clear();
  for (uint32_t i = 0; i < globals.size(); ++i) global_index_.emplace(globals[i].name, i);
  for (uint32_t i = 0; i < functions.size(); ++i) fn_index_.emplace(functions[i].name, i);

  locals_.assign(functions.size(), {});
  local_index_.assign(functions.size(), {});
  block_index_.assign(functions.size(), {});
  block_base_.assign(functions.size(), {});
  locs_.clear();

  for (uint32_t f = 0; f < functions.size(); ++f) {
    const Function &fn = functions[f];
    auto add_local = [&](const std::string &name) {
      if (local_index_[f].emplace(name, locals_[f].size()).second) locals_[f].push_back(name);
    };
    for (const auto &p : fn.params) add_local(p);
    for (uint32_t b = 0; b < fn.blocks.size(); ++b) {
      block_index_[f].emplace(fn.blocks[b].label, b);
      block_base_[f].push_back(static_cast<uint32_t>(locs_.size()));
      for (uint32_t i = 0; i < fn.blocks[b].instrs.size(); ++i) {
        const Instruction &in = fn.blocks[b].instrs[i];
        if (!in.dest.empty()) add_local(in.dest);
        locs_.push_back({f, b, i});
      }
    }
  }
}

std::optional<uint32_t> PointerModule::function_index(std::string_view name) const {
  auto it = fn_index_.find(std::string(name));
  if (it == fn_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<uint32_t> PointerModule::global_index(std::string_view name) const {
  auto it = global_index_.find(std::string(name));
  if (it == global_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<uint32_t> PointerModule::local_index(uint32_t fn, std::string_view name) const {
  auto it = local_index_[fn].find(std::string(name));
  if (it == local_index_[fn].end()) return std::nullopt;
  return it->second;
}

std::optional<uint32_t> PointerModule::block_index(uint32_t fn, std::string_view label) const {
  auto it = block_index_[fn].find(std::string(label));
  if (it == block_index_[fn].end()) return std::nullopt;
  return it->second;
}

const Instruction &PointerModule::instr(InstrId id) const {
  const InstrLoc &l = locs_.at(id);
  return functions[l.function].blocks[l.block].instrs[l.index];
}

std::optional<InstrId> PointerModule::entry_instr(uint32_t fn) const {
  const Function &f = functions[fn];
  if (f.blocks.empty() || f.blocks[0].instrs.empty()) return std::nullopt;
  return block_base_[fn][0];
}

std::string PointerModule::instr_name(InstrId id) const {
  const InstrLoc &l = loc(id);
  const Function &f = functions[l.function];
  return "@" + f.name + ":" + f.blocks[l.block].label + ":" + std::to_string(l.index);
}

//===----------------------------------------------------------------------===//
// Lexer
//===----------------------------------------------------------------------===//

namespace {

enum class Tok { Word, Var, Sym, Int, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 1;
  int column = 1;
};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '$';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run(std::vector<Diagnostic> &diags) {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (c == '%' || c == '@') {
        advance();
        std::string name = word();
        if (name.empty()) {
          diags.push_back({Diagnostic::Severity::Error, t.line, t.column,
                           std::string("expected identifier after '") + c + "'"});
          return {};
        }
        t.kind = c == '%' ? Tok::Var : Tok::Sym;
        t.text = std::move(name);
      } else if (is_word_char(c)) {
        t.text = word();
        bool digits = true;
        for (char d : t.text) digits = digits && std::isdigit(static_cast<unsigned char>(d));
        t.kind = digits ? Tok::Int : Tok::Word;
      } else if (std::string_view("=,(){}:").find(c) != std::string_view::npos) {
        advance();
        t.kind = Tok::Punct;
        t.text = std::string(1, c);
      } else {
        diags.push_back({Diagnostic::Severity::Error, t.line, t.column,
                         std::string("unexpected character '") + c + "'"});
        return {};
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ';') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }
  std::string word() {
    std::string w;
    while (pos_ < src_.size() && is_word_char(src_[pos_])) {
      w.push_back(src_[pos_]);
      advance();
    }
    return w;
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

//===----------------------------------------------------------------------===//
// Parser
//===----------------------------------------------------------------------===//

struct SyntaxError {
  Token at;
  std::string expected;
};

const char *tok_desc(Tok k) {
  switch (k) {
    case Tok::Word: return "identifier";
    case Tok::Var: return "variable";
    case Tok::Sym: return "symbol";
    case Tok::Int: return "integer";
    case Tok::Punct: return "punctuation";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  PointerModule module() {
    PointerModule m;
    while (peek().kind != Tok::End) {
      if (is_word("global")) {
        Token kw = next();
        GlobalDecl g;
        g.line = kw.line;
        g.name = expect(Tok::Sym, "'@' global name").text;
        m.globals.push_back(std::move(g));
      } else if (is_word("func")) {
        m.functions.push_back(function());
      } else {
        fail("'global' or 'func'");
      }
    }
    return m;
  }

 private:
  const Token &peek(size_t ahead = 0) const {
    size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool is_word(std::string_view w, size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Word && peek(ahead).text == w;
  }
  bool is_punct(char c, size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Punct && peek(ahead).text[0] == c;
  }
  [[noreturn]] void fail(std::string expected) { throw SyntaxError{peek(), std::move(expected)}; }
  Token expect(Tok kind, const std::string &what) {
    if (peek().kind != kind) fail(what);
    return next();
  }
  void expect_punct(char c) {
    if (!is_punct(c)) fail(std::string("'") + c + "'");
    next();
  }

  Function function() {
    Token kw = next();
    Function f;
    f.line = kw.line;
    f.name = expect(Tok::Sym, "'@' function name").text;
    expect_punct('(');
    if (!is_punct(')')) {
      f.params.push_back(expect(Tok::Var, "'%' parameter").text);
      while (is_punct(',')) {
        next();
        f.params.push_back(expect(Tok::Var, "'%' parameter").text);
      }
    }
    expect_punct(')');
    expect_punct('{');
    while (!is_punct('}')) {
      if (peek().kind == Tok::End) fail("'}'");
      if ((peek().kind == Tok::Word || peek().kind == Tok::Int) && is_punct(':', 1)) {
        BasicBlock b;
        b.line = peek().line;
        b.label = next().text;
        next();
        f.blocks.push_back(std::move(b));
        continue;
      }
      if (f.blocks.empty()) fail("block label");
      f.blocks.back().instrs.push_back(instruction());
    }
    next();
    if (f.blocks.empty()) fail("at least one block");
    return f;
  }

  std::vector<std::string> args() {
    std::vector<std::string> out;
    expect_punct('(');
    if (!is_punct(')')) {
      out.push_back(expect(Tok::Var, "'%' argument").text);
      while (is_punct(',')) {
        next();
        out.push_back(expect(Tok::Var, "'%' argument").text);
      }
    }
    expect_punct(')');
    return out;
  }

  Instruction instruction() {
    Instruction in;
    in.line = peek().line;
    in.column = peek().column;
    if (is_word("store")) {
      next();
      in.op = Opcode::Store;
      in.operands.push_back(expect(Tok::Var, "'%' value").text);
      expect_punct(',');
      in.operands.push_back(expect(Tok::Var, "'%' pointer").text);
      return in;
    }
    if (is_word("ret")) {
      next();
      in.op = Opcode::Ret;
      // A variable followed by '=' starts the next instruction.
      if (peek().kind == Tok::Var && !is_punct('=', 1)) in.operands.push_back(next().text);
      return in;
    }
    if (is_word("br")) {
      next();
      in.op = Opcode::Br;
      in.targets.push_back(label());
      if (is_punct(',')) {
        next();
        in.targets.push_back(label());
      }
      return in;
    }
    if (peek().kind != Tok::Var) fail("instruction");
    in.dest = next().text;
    expect_punct('=');
    Token op = expect(Tok::Word, "opcode");
    if (op.text == "alloc") {
      in.op = Opcode::Alloc;
      in.symbol = expect(Tok::Word, "object name").text;
    } else if (op.text == "addr") {
      in.op = Opcode::Addr;
      in.symbol = expect(Tok::Sym, "'@' global or function").text;
    } else if (op.text == "copy" || op.text == "load") {
      in.op = op.text == "copy" ? Opcode::Copy : Opcode::Load;
      in.operands.push_back(expect(Tok::Var, "'%' operand").text);
    } else if (op.text == "field") {
      in.op = Opcode::Field;
      in.operands.push_back(expect(Tok::Var, "'%' base").text);
      expect_punct(',');
      Token idx = expect(Tok::Int, "non-negative field index");
      if (idx.text.size() > 9) throw SyntaxError{idx, "field index of at most 9 digits"};
      in.field_index = std::stoi(idx.text);
    } else if (op.text == "call") {
      in.op = Opcode::Call;
      in.symbol = expect(Tok::Sym, "'@' callee").text;
      in.operands = args();
    } else if (op.text == "icall") {
      in.op = Opcode::ICall;
      in.operands.push_back(expect(Tok::Var, "'%' function pointer").text);
      auto a = args();
      in.operands.insert(in.operands.end(), a.begin(), a.end());
    } else {
      throw SyntaxError{op, "one of alloc, addr, copy, load, field, call, icall"};
    }
    return in;
  }

  std::string label() {
    if (peek().kind != Tok::Word && peek().kind != Tok::Int) fail("block label");
    return next().text;
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace

ParseResult parse_module(std::string_view text, int max_field) {
  ParseResult res;
  std::vector<Token> toks = Lexer(text).run(res.diagnostics);
  if (toks.empty()) return res;
  PointerModule m;
  try {
    m = Parser(std::move(toks)).module();
  } catch (const SyntaxError &e) {
    std::string got = e.at.kind == Tok::End ? "end of input" : "'" + e.at.text + "'";
    res.diagnostics.push_back({Diagnostic::Severity::Error, e.at.line, e.at.column,
                               "syntax error: expected " + e.expected + ", found " + got + " (" +
                                   tok_desc(e.at.kind) + ")"});
    return res;
  }
  m.max_field = max_field;
  m.finalize();
  auto diags = validate(m);
  bool failed = false;
  for (auto &d : diags) failed = failed || d.is_error();
  res.diagnostics.insert(res.diagnostics.end(), diags.begin(), diags.end());
  if (!failed) res.module = std::move(m);
  return res;
}

//===----------------------------------------------------------------------===//
// Validation
//===----------------------------------------------------------------------===//

std::vector<Diagnostic> validate(const PointerModule &m) {
  std::vector<Diagnostic> out;
  auto error = [&](int line, int col, std::string msg) {
    out.push_back({Diagnostic::Severity::Error, line, col, std::move(msg)});
  };

  std::unordered_set<std::string> symbols;
  for (const auto &g : m.globals)
    if (!symbols.insert(g.name).second) error(g.line, 1, "duplicate name @" + g.name);
  for (const auto &f : m.functions)
    if (!symbols.insert(f.name).second) error(f.line, 1, "duplicate name @" + f.name);
  if (!m.function_index(m.entry)) error(1, 1, "entry function @" + m.entry + " is not defined");

  std::unordered_set<std::string> alloc_names;
  for (uint32_t fi = 0; fi < m.functions.size(); ++fi) {
    const Function &f = m.functions[fi];
    std::unordered_set<std::string> params;
    for (const auto &p : f.params)
      if (!params.insert(p).second) error(f.line, 1, "duplicate parameter %" + p + " in @" + f.name);

    std::unordered_set<std::string> labels;
    for (const auto &b : f.blocks)
      if (!labels.insert(b.label).second)
        error(b.line, 1, "duplicate block label " + b.label + " in @" + f.name);

    auto var = [&](const Instruction &in, const std::string &name) {
      if (!m.local_index(fi, name))
        error(in.line, in.column, "unresolved variable %" + name + " in @" + f.name);
    };

    for (const auto &b : f.blocks) {
      bool terminated = false;
      for (const auto &in : b.instrs) {
        if (terminated) {
          error(in.line, in.column,
                "instruction after terminator in block " + b.label + " of @" + f.name);
          break;
        }
        switch (in.op) {
          case Opcode::Alloc:
            if (!alloc_names.insert(in.symbol).second)
              error(in.line, in.column, "duplicate allocation site name " + in.symbol);
            break;
          case Opcode::Addr:
            if (!m.global_index(in.symbol) && !m.function_index(in.symbol))
              error(in.line, in.column, "unresolved symbol @" + in.symbol);
            break;
          case Opcode::Field:
            if (in.field_index < 0 || in.field_index > m.max_field)
              error(in.line, in.column,
                    "field index " + std::to_string(in.field_index) + " exceeds maximum " +
                        std::to_string(m.max_field));
            break;
          case Opcode::Call: {
            auto callee = m.function_index(in.symbol);
            if (!callee) {
              error(in.line, in.column, "unresolved function @" + in.symbol);
            } else if (m.functions[*callee].params.size() != in.operands.size()) {
              error(in.line, in.column,
                    "call to @" + in.symbol + " passes " + std::to_string(in.operands.size()) +
                        " arguments, expected " +
                        std::to_string(m.functions[*callee].params.size()));
            }
            break;
          }
          case Opcode::Br:
            for (const auto &t : in.targets)
              if (!m.block_index(fi, t))
                error(in.line, in.column, "unresolved branch target " + t + " in @" + f.name);
            break;
          default:
            break;
        }
        for (const auto &o : in.operands) var(in, o);
        terminated = in.is_terminator();
      }
      if (!terminated && (b.instrs.empty() || !b.instrs.back().is_terminator()))
        error(b.line, 1, "block " + b.label + " of @" + f.name + " has no terminator");
    }
  }

  bool has_error = false;
  for (auto &d : out) has_error = has_error || d.is_error();
  if (has_error) return out;

  for (uint32_t fi = 0; fi < m.functions.size(); ++fi) {
    const Function &f = m.functions[fi];
    CFG cfg = build_cfg(m, fi);
    auto reach = cfg.reachable_from_entry();
    for (uint32_t b = 0; b < f.blocks.size(); ++b) {
      uint32_t node = m.block_first(fi, b) - cfg.first;
      if (!reach[node])
        out.push_back({Diagnostic::Severity::Warning, f.blocks[b].line, 1,
                       "block " + f.blocks[b].label + " of @" + f.name + " is unreachable"});
    }
  }
  return out;
}

//===----------------------------------------------------------------------===//
// Printing
//===----------------------------------------------------------------------===//

namespace {

void print_args(std::ostream &os, const std::vector<std::string> &ops, size_t from) {
  os << "(";
  for (size_t i = from; i < ops.size(); ++i) os << (i > from ? ", " : "") << "%" << ops[i];
  os << ")";
}

}  // namespace

std::string pretty_print(const PointerModule &m) {
  std::ostringstream os;
  for (const auto &g : m.globals) os << "global @" << g.name << "\n";
  for (const auto &f : m.functions) {
    if (os.tellp() > 0) os << "\n";
    os << "func @" << f.name << "(";
    for (size_t i = 0; i < f.params.size(); ++i) os << (i ? ", " : "") << "%" << f.params[i];
    os << ") {\n";
    for (const auto &b : f.blocks) {
      os << b.label << ":\n";
      for (const auto &in : b.instrs) {
        os << "  ";
        if (!in.dest.empty()) os << "%" << in.dest << " = ";
        switch (in.op) {
          case Opcode::Alloc: os << "alloc " << in.symbol; break;
          case Opcode::Addr: os << "addr @" << in.symbol; break;
          case Opcode::Copy: os << "copy %" << in.operands[0]; break;
          case Opcode::Load: os << "load %" << in.operands[0]; break;
          case Opcode::Store: os << "store %" << in.operands[0] << ", %" << in.operands[1]; break;
          case Opcode::Field: os << "field %" << in.operands[0] << ", " << in.field_index; break;
          case Opcode::Call:
            os << "call @" << in.symbol;
            print_args(os, in.operands, 0);
            break;
          case Opcode::ICall:
            os << "icall %" << in.operands[0];
            print_args(os, in.operands, 1);
            break;
          case Opcode::Ret:
            os << "ret";
            if (!in.operands.empty()) os << " %" << in.operands[0];
            break;
          case Opcode::Br:
            os << "br " << in.targets[0];
            if (in.targets.size() > 1) os << ", " << in.targets[1];
            break;
        }
        os << "\n";
      }
    }
    os << "}\n";
  }
  return os.str();
}

//===----------------------------------------------------------------------===//
// CFG
//===----------------------------------------------------------------------===//

CFG build_cfg(const PointerModule &m, uint32_t fn) {
  CFG g;
  g.function = fn;
  const Function &f = m.functions[fn];
  size_t n = 0;
  for (const auto &b : f.blocks) n += b.instrs.size();
  g.first = n ? m.block_first(fn, 0) : 0;
  g.succ.assign(n, {});
  g.pred.assign(n, {});
  auto edge = [&](uint32_t a, uint32_t b) {
    g.succ[a].push_back(b);
    g.pred[b].push_back(a);
  };
  for (uint32_t b = 0; b < f.blocks.size(); ++b) {
    const auto &instrs = f.blocks[b].instrs;
    uint32_t base = m.block_first(fn, b) - g.first;
    for (uint32_t i = 0; i < instrs.size(); ++i) {
      const Instruction &in = instrs[i];
      if (in.op == Opcode::Br) {
        for (const auto &t : in.targets) {
          auto tb = m.block_index(fn, t);
          if (!tb || f.blocks[*tb].instrs.empty()) continue;
          edge(base + i, m.block_first(fn, *tb) - g.first);
        }
      } else if (in.op != Opcode::Ret && i + 1 < instrs.size()) {
        edge(base + i, base + i + 1);
      }
    }
  }
  return g;
}

size_t CFG::edge_count() const {
  size_t n = 0;
  for (const auto &s : succ) n += s.size();
  return n;
}

std::vector<bool> CFG::reachable_from_entry() const {
  std::vector<bool> seen(size(), false);
  if (size() == 0) return seen;
  std::vector<uint32_t> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    uint32_t n = stack.back();
    stack.pop_back();
    for (uint32_t s : succ[n])
      if (!seen[s]) {
        seen[s] = true;
        stack.push_back(s);
      }
  }
  return seen;
}

std::vector<bool> CFG::on_cycle() const {
  return nodes_on_cycles(static_cast<uint32_t>(size()),
                         [&](uint32_t v) -> const std::vector<uint32_t> & { return succ[v]; });
}

}  // namespace pta
