#include "pta/interpreter.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace pta {

const char *to_string(Halt h) {
  switch (h) {
    case Halt::Finished: return "finished";
    case Halt::NullDeref: return "null-deref";
    case Halt::BadCall: return "bad-call";
    case Halt::StepCap: return "step-cap";
    case Halt::InstanceCap: return "instance-cap";
    case Halt::DepthCap: return "depth-cap";
  }
  return "?";
}

std::string Trace::str() const {
  return "halt=" + std::string(to_string(halt)) + " steps=" + std::to_string(steps) +
         " facts=" + std::to_string(facts.size()) + " loads=" + std::to_string(loads.size());
}

namespace {

struct Value {
  uint32_t object = kNone;  // kNone = null
  uint32_t instance = 0;
  uint32_t field = 0;
  bool null() const { return object == kNone; }
  auto operator<=>(const Value &) const = default;
};

struct Writer {
  uint64_t time = 0;
  uint64_t activation = 0;
  InstrId store = kNone;
};

struct Frame {
  uint32_t function = 0;
  uint32_t pc = 0;  // local instruction index
  uint64_t activation = 0;
  std::vector<Value> locals;
  std::vector<std::pair<uint64_t, InstrId>> calls;  // (start time, call site)
  InstrId call_site = kNone;  // in the caller
};

struct TripleHash {
  size_t operator()(const std::tuple<uint32_t, uint32_t, uint32_t> &t) const {
    uint64_t h = std::get<0>(t);
    h = h * 0x9E3779B97F4A7C15ull ^ std::get<1>(t);
    h = h * 0x9E3779B97F4A7C15ull ^ std::get<2>(t);
    return static_cast<size_t>(h ^ (h >> 29));
  }
};

}  // namespace

Trace interpret(std::shared_ptr<const NodeTable> tp, const InterpOptions &opts) {
  const NodeTable &t = *tp;
  const PointerModule &m = t.module();
  Trace trace;
  auto entry = m.entry_index();
  if (!entry) return trace;

  std::vector<uint32_t> alloc_object(m.instruction_count(), kNone);
  for (uint32_t o = 0; o < t.objects().size(); ++o)
    if (t.object(o).kind == ObjectKind::AllocSite) alloc_object[t.object(o).origin] = o;
  std::vector<uint32_t> first(m.functions.size());
  for (uint32_t f = 0; f < m.functions.size(); ++f) first[f] = *m.entry_instr(f);
  // Local indices of operands, resolved once.
  std::vector<std::vector<uint32_t>> ops(m.instruction_count());
  std::vector<uint32_t> dest(m.instruction_count(), kNone);
  for (InstrId id = 0; id < m.instruction_count(); ++id) {
    const Instruction &in = m.instr(id);
    const uint32_t f = m.loc(id).function;
    for (const auto &o : in.operands) ops[id].push_back(*m.local_index(f, o));
    if (!in.dest.empty()) dest[id] = *m.local_index(f, in.dest);
  }

  std::map<std::tuple<uint32_t, uint32_t, uint32_t>, Value> memory;
  std::map<std::tuple<uint32_t, uint32_t, uint32_t>, Writer> writers;
  std::vector<uint32_t> instances(t.objects().size(), 0);
  std::unordered_set<std::tuple<uint32_t, uint32_t, uint32_t>, TripleHash> facts, loads, sources;
  uint64_t clock = 0;

  std::vector<Frame> stack;
  auto push_frame = [&](uint32_t f, std::vector<Value> args, InstrId site) {
    Frame fr;
    fr.function = f;
    fr.activation = ++clock;
    fr.locals.assign(m.locals(f).size(), Value{});
    std::copy(args.begin(), args.end(), fr.locals.begin());
    fr.call_site = site;
    stack.push_back(std::move(fr));
  };
  push_frame(*entry, {}, kNone);

  auto cell_of = [&](const Value &v) { return t.cell(v.object, v.field); };
  auto key_of = [](const Value &v) { return std::make_tuple(v.object, v.instance, v.field); };

  while (true) {
    if (trace.steps >= opts.max_steps) {
      trace.halt = Halt::StepCap;
      break;
    }
    ++trace.steps;
    ++clock;
    Frame &fr = stack.back();
    const uint32_t f = fr.function;
    const InstrId id = first[f] + fr.pc;
    const Instruction &in = m.instr(id);
    for (uint32_t l = 0; l < fr.locals.size(); ++l)
      if (!fr.locals[l].null()) facts.insert({id, t.var(f, l), cell_of(fr.locals[l])});
    const auto &op = ops[id];
    bool advance = true;
    bool stop = false;
    switch (in.op) {
      case Opcode::Alloc: {
        uint32_t o = alloc_object[id];
        if (instances[o] >= opts.max_instances) {
          trace.halt = Halt::InstanceCap;
          stop = true;
          break;
        }
        fr.locals[dest[id]] = Value{o, instances[o]++, 0};
        break;
      }
      case Opcode::Addr: {
        uint32_t o;
        if (auto g = m.global_index(in.symbol)) {
          o = t.global_object(*g);
        } else {
          o = t.function_object(*m.function_index(in.symbol));
        }
        fr.locals[dest[id]] = Value{o, 0, 0};
        break;
      }
      case Opcode::Copy: fr.locals[dest[id]] = fr.locals[op[0]]; break;
      case Opcode::Field: {
        Value v = fr.locals[op[0]];
        if (!v.null()) v.field = t.field_of(t.field_offset(cell_of(v), in.field_index));
        fr.locals[dest[id]] = v;
        break;
      }
      case Opcode::Load: {
        Value p = fr.locals[op[0]];
        if (p.null()) {
          trace.halt = Halt::NullDeref;
          stop = true;
          break;
        }
        auto it = memory.find(key_of(p));
        Value v = it == memory.end() ? Value{} : it->second;
        if (!v.null()) loads.insert({id, cell_of(p), cell_of(v)});
        InstrId def = kNone;
        auto w = writers.find(key_of(p));
        if (w != writers.end()) {
          if (w->second.activation == fr.activation) {
            def = w->second.store;
          } else if (w->second.time > fr.activation) {
            // Written during a call made by this activation: the last call
            // started before the write.
            auto c = std::upper_bound(fr.calls.begin(), fr.calls.end(), std::make_pair(w->second.time, kNone));
            if (c != fr.calls.begin()) def = std::prev(c)->second;
          }
        }
        sources.insert({id, p.object, def});
        fr.locals[dest[id]] = v;
        break;
      }
      case Opcode::Store: {
        Value p = fr.locals[op[1]];
        if (p.null()) {
          trace.halt = Halt::NullDeref;
          stop = true;
          break;
        }
        memory[key_of(p)] = fr.locals[op[0]];
        writers[key_of(p)] = Writer{clock, fr.activation, id};
        break;
      }
      case Opcode::Call:
      case Opcode::ICall: {
        uint32_t callee;
        size_t first_arg = 0;
        if (in.op == Opcode::Call) {
          callee = *m.function_index(in.symbol);
        } else {
          first_arg = 1;
          Value fp = fr.locals[op[0]];
          auto fn = fp.null() ? std::nullopt : t.function_of_object(fp.object);
          if (!fn || m.functions[*fn].params.size() + 1 != op.size()) {
            trace.halt = Halt::BadCall;
            stop = true;
            break;
          }
          callee = *fn;
        }
        if (stack.size() >= opts.max_depth) {
          trace.halt = Halt::DepthCap;
          stop = true;
          break;
        }
        std::vector<Value> args;
        for (size_t a = first_arg; a < op.size(); ++a) args.push_back(fr.locals[op[a]]);
        fr.calls.emplace_back(clock, id);
        push_frame(callee, std::move(args), id);
        advance = false;
        break;
      }
      case Opcode::Ret: {
        Value r = op.empty() ? Value{} : fr.locals[op[0]];
        InstrId site = fr.call_site;
        stack.pop_back();
        if (stack.empty()) {
          stop = true;
          break;
        }
        Frame &caller = stack.back();
        caller.locals[dest[site]] = r;
        caller.pc++;
        advance = false;
        break;
      }
      case Opcode::Br: {
        uint32_t b = *m.block_index(f, in.targets[0]);
        fr.pc = m.block_first(f, b) - first[f];
        advance = false;
        break;
      }
    }
    if (stop) break;
    if (advance) stack.back().pc++;
  }

  for (const auto &[i, v, c] : facts) trace.facts.push_back({i, v, c});
  for (const auto &[i, c, v] : loads) trace.loads.push_back({i, c, v});
  for (const auto &[i, o, d] : sources) trace.sources.push_back({i, o, d});
  std::sort(trace.facts.begin(), trace.facts.end());
  std::sort(trace.loads.begin(), trace.loads.end());
  std::sort(trace.sources.begin(), trace.sources.end());
  return trace;
}

}  // namespace pta
