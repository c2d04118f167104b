/*
 * Copyright (c) 2026-present the spc authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spc/runtime/machine.h"

#include <algorithm>
#include <sstream>

#include "spc/emu/emulator.h"
#include "spc/interp/interpreter.h"

namespace spc::runtime {

using compiler::CompiledFunction;
using wasm::Tag;
using wasm::ValType;

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::Interp: return "int";
    case Mode::Jit: return "jit";
    case Mode::Tiered: return "tiered";
  }
  return "?";
}

std::string to_string(const Outcome& o) {
  switch (o.status) {
    case Outcome::Status::Ok: return o.value ? "ok " + wasm::to_string(*o.value) : "ok";
    case Outcome::Status::Limit: return "limit";
    case Outcome::Status::Trap: {
      std::ostringstream s;
      s << "trap " << wasm::trap_kind_name(o.trap) << " (" << wasm::trap_name(o.trap) << ") at " << o.trap_func << ":" << o.trap_pc;
      return s.str();
    }
  }
  return "?";
}

// ---- FrameView ----

uint32_t FrameView::func() const { return es_->acts[index_].func; }
FrameKind FrameView::kind() const {
  return flags_kind(es_->stack.word(es_->acts[index_].fp + kMetaFlags));
}
uint32_t FrameView::pc() const { return es_->acts[index_].pause_pc; }
uint32_t FrameView::height() const { return es_->acts[index_].height; }
uint32_t FrameView::num_locals() const { return es_->module.defined(func()).num_locals; }
uint64_t FrameView::value(uint32_t slot) const { return es_->stack.word(es_->acts[index_].vfp() + slot); }
wasm::Tag FrameView::tag(uint32_t slot) const {
  return static_cast<Tag>(es_->stack.tag(es_->acts[index_].vfp() + slot));
}
std::vector<uint64_t> FrameView::operands() const {
  std::vector<uint64_t> out;
  for (uint32_t j = num_locals(); j < height(); j++) out.push_back(value(j));
  return out;
}

// ---- ExecState ----

ExecState::ExecState(const wasm::WasmModule& m, MachineOptions o) : module(m), opts(std::move(o)) {
  size_t n = m.num_functions();
  compiled.resize(n);
  type_maps.resize(n);
  invocations.assign(n, 0);
  force_interp.assign(n, false);
  deopt.assign(n, false);
  probes.resize(n);
}

const CompiledFunction& ExecState::compiled_for(uint32_t func) {
  auto& c = compiled.at(func);
  if (!c) c = std::make_unique<CompiledFunction>(compiler::compile_function(module, func, opts.config));
  return *c;
}

const wasm::TypeMap& ExecState::type_map(uint32_t func) {
  auto& t = type_maps.at(func);
  if (!t) t = std::make_unique<wasm::TypeMap>(wasm::build_type_map(module, func));
  return *t;
}

uint32_t ExecState::grow(uint32_t delta) {
  uint32_t old = pages();
  if (static_cast<uint64_t>(old) + delta > max_pages) return 0xffffffffu;
  memory.resize(static_cast<size_t>(old + delta) * wasm::kPageSize, 0);
  return old;
}

bool ExecState::want_tier_up(uint32_t func, uint32_t pc, uint64_t hotness) {
  if (opts.mode != Mode::Tiered || force_interp[func]) return false;
  bool want = policy ? policy({SafepointKind::LoopHeader, FrameKind::Interp, func, pc}) : hotness >= opts.hot_threshold;
  return want && compiled_for(func).vpc_for_loop(pc).has_value();
}

bool ExecState::want_tier_down(uint32_t func, uint32_t pc) {
  if (deopt[func]) return true;
  return opts.mode == Mode::Tiered && policy && policy({SafepointKind::LoopHeader, FrameKind::Jit, func, pc});
}

std::vector<ValType> ExecState::live_types(size_t index) {
  const Activation& a = acts[index];
  const wasm::WasmFunction& f = module.defined(a.func);
  std::vector<ValType> out(f.local_types.begin(), f.local_types.end());
  if (a.height > f.num_locals) {
    auto ops = type_map(a.func).at(a.pause_pc);
    uint32_t n = a.height - f.num_locals;
    if (!ops || ops->size() < n) throw std::logic_error("live_types: no operand types at pause point");
    out.insert(out.end(), ops->begin(), ops->begin() + n);
  }
  out.resize(a.height);
  return out;
}

void ExecState::audit_frame(size_t index) {
  const Activation& a = acts[index];
  FrameKind kind = flags_kind(stack.word(a.fp + kMetaFlags));
  uint32_t nl = module.defined(a.func).num_locals;
  auto types = live_types(index);
  for (uint32_t j = 0; j < a.height; j++) {
    bool reads = j < nl ? compiler::walker_reads_local_tags(opts.config.tagging)
                        : compiler::walker_reads_operand_tags(opts.config.tagging);
    Tag t = static_cast<Tag>(stack.tag(a.vfp() + j));
    if ((kind == FrameKind::Interp || reads) && t != wasm::tag_of(types[j])) {
      std::ostringstream s;
      s << "frame " << index << " func " << a.func << " pc " << a.pause_pc << " slot " << j << ": tag "
        << wasm::tag_name(t) << ", expected " << wasm::valtype_name(types[j]);
      throw AuditFailure(s.str());
    }
    uint64_t v = stack.word(a.vfp() + j);
    if (types[j] == ValType::Ref && v > max_handle) {
      std::ostringstream s;
      s << "frame " << index << " func " << a.func << " pc " << a.pause_pc << " slot " << j << ": bad ref " << v;
      throw AuditFailure(s.str());
    }
  }
}

// ---- Machine ----

Machine::Machine(const wasm::WasmModule& module, MachineOptions opts) : es_(module, std::move(opts)) {}

namespace {

struct HostImport {
  std::string_view name;
  wasm::FuncType type;
};

const std::vector<HostImport>& host_imports() {
  static const std::vector<HostImport> table = {
      {"gc_scan", {{}, std::nullopt}},
      {"make_ref", {{ValType::I32}, ValType::Ref}},
      {"ref_id", {{ValType::Ref}, ValType::I32}},
      {"print", {{ValType::I64}, std::nullopt}},
  };
  return table;
}

}  // namespace

Outcome Machine::instantiate() {
  if (instantiated_) return {};
  const wasm::WasmModule& m = es_.module;
  for (uint32_t i = 0; i < m.num_imports(); i++) {
    const wasm::Import& im = m.imports[i];
    const auto& table = host_imports();
    auto it = std::find_if(table.begin(), table.end(), [&](const HostImport& h) { return h.name == im.name; });
    if (im.module != "host" || it == table.end() || !(it->type == m.func_type(i)))
      throw LinkError("unknown import " + im.module + "." + im.name);
  }
  if (m.memory) {
    uint32_t max = std::min(es_.opts.max_pages, m.memory->max.value_or(wasm::kMaxPages));
    if (m.memory->initial > max) throw LinkError("initial memory exceeds the page limit");
    es_.max_pages = max;
    es_.memory.assign(static_cast<size_t>(m.memory->initial) * wasm::kPageSize, 0);
  }
  for (const wasm::DataSegment& d : m.data) {
    if (static_cast<uint64_t>(d.offset) + d.bytes.size() > es_.memory.size())
      throw LinkError("data segment out of bounds");
    std::copy(d.bytes.begin(), d.bytes.end(), es_.memory.begin() + d.offset);
  }
  es_.globals.clear();
  for (const wasm::Global& g : m.globals) es_.globals.push_back(wasm::normalize(g.type, g.init.bits));
  instantiated_ = true;
  if (m.start) return invoke(*m.start, {});
  return {};
}

Outcome Machine::run_main(std::span<const TypedValue> args) {
  Outcome o = instantiate();
  if (!o.ok()) return o;
  auto entry = es_.module.entry_function();
  if (!entry || entry == es_.module.start) return o;
  return invoke(*entry, args);
}

Outcome Machine::invoke(uint32_t func, std::span<const TypedValue> args) {
  if (!instantiated_) {
    Outcome o = instantiate();
    if (!o.ok()) return o;
  }
  const wasm::WasmModule& m = es_.module;
  if (func >= m.num_functions() || m.is_import(func)) throw std::invalid_argument("invoke: not a defined function");
  const wasm::FuncType& ft = m.func_type(func);
  if (args.size() != ft.params.size()) throw std::invalid_argument("invoke: argument count mismatch");
  std::vector<uint64_t> bits;
  for (size_t k = 0; k < args.size(); k++) {
    if (args[k].type != ft.params[k]) throw std::invalid_argument("invoke: argument type mismatch");
    bits.push_back(wasm::normalize(args[k].type, args[k].bits));
  }
  size_t base = es_.acts.size();
  if (base >= kMaxFrames) return trap_outcome(TrapKind::StackOverflow, func, 0, base);
  push_frame(func, choose_kind(func), bits.data(), nullptr);
  try {
    return run_loop(base);
  } catch (...) {
    es_.acts.resize(base);
    throw;
  }
}

FrameKind Machine::choose_kind(uint32_t func) {
  const MachineOptions& o = es_.opts;
  uint32_t n = ++es_.invocations[func];
  if (o.mode == Mode::Interp || es_.force_interp[func]) return FrameKind::Interp;
  if (o.mode == Mode::Jit) return FrameKind::Jit;
  if (es_.policy) {
    uint32_t pc = es_.module.defined(func).code_offset;
    return es_.policy({SafepointKind::Entry, FrameKind::Interp, func, pc}) ? FrameKind::Jit : FrameKind::Interp;
  }
  return n >= o.hot_threshold ? FrameKind::Jit : FrameKind::Interp;
}

void Machine::push_frame(uint32_t func, FrameKind kind, const uint64_t* args, const uint8_t* arg_tags) {
  const wasm::WasmFunction& f = es_.module.defined(func);
  size_t fp = 0;
  if (!es_.acts.empty()) {
    const Activation& top = es_.acts.back();
    fp = top.fp + frame_words(es_.module.defined(top.func));
  }
  es_.stack.ensure(fp + frame_words(f));
  uint64_t* W = es_.stack.words();
  uint8_t* T = es_.stack.tags();
  W[fp + kMetaFunc] = func;
  W[fp + kMetaIp] = kind == FrameKind::Interp ? f.code_offset : 0;
  W[fp + kMetaStp] = 0;
  W[fp + kMetaFlags] = make_flags(kind, 0);
  std::fill(T + fp, T + fp + kFrameHeaderWords, 0);
  uint64_t* V = W + fp + kFrameHeaderWords;
  uint8_t* G = T + fp + kFrameHeaderWords;
  for (uint32_t k = 0; k < f.num_params; k++) {
    V[k] = args[k];
    G[k] = kind == FrameKind::Jit && arg_tags ? arg_tags[k] : static_cast<uint8_t>(wasm::tag_of(f.local_types[k]));
  }
  for (uint32_t k = f.num_params; k < f.num_locals; k++) {
    V[k] = 0;
    G[k] = kind == FrameKind::Interp ? static_cast<uint8_t>(wasm::tag_of(f.local_types[k])) : 0;
  }
  std::fill(G + f.num_locals, G + f.frame_slots(), 0);
  Activation a;
  a.func = func;
  a.fp = fp;
  a.height = f.num_locals;
  a.pause_pc = f.code_offset;
  es_.acts.push_back(a);
  max_frames_ = std::max<uint32_t>(max_frames_, static_cast<uint32_t>(es_.acts.size()));
}

void Machine::deliver(size_t index, std::optional<TypedValue> value) {
  Activation& a = es_.acts[index];
  FrameKind kind = flags_kind(es_.stack.word(a.fp + kMetaFlags));
  const MachineOptions& o = es_.opts;
  if (kind == FrameKind::Jit) {
    if (es_.deopt[a.func] ||
        (o.mode == Mode::Tiered && es_.policy &&
         es_.policy({SafepointKind::CallReturn, FrameKind::Jit, a.func, a.pause_pc}))) {
      tier_down(index);
      kind = FrameKind::Interp;
    }
  } else if (o.mode == Mode::Tiered && !es_.force_interp[a.func] && es_.policy &&
             es_.policy({SafepointKind::CallReturn, FrameKind::Interp, a.func, a.pause_pc})) {
    try {
      tier_up(index);
      kind = FrameKind::Jit;
    } catch (const NoSafepoint&) {
    }
  }
  if (kind == FrameKind::Interp) {
    if (value) {
      size_t s = a.vfp() + a.height;
      es_.stack.word(s) = value->bits;
      es_.stack.tag(s) = static_cast<uint8_t>(wasm::tag_of(value->type));
      a.height++;
    }
  } else {
    a.has_resume = value.has_value();
    a.resume_bits = value ? value->bits : 0;
  }
}

std::optional<Outcome> Machine::call_host(uint32_t import, size_t caller, uint32_t argbase) {
  const wasm::WasmModule& m = es_.module;
  const wasm::Import& im = m.imports[import];
  const wasm::FuncType& ft = m.func_type(import);
  const Activation& a = es_.acts[caller];
  HostEvent ev;
  ev.name = im.name;
  for (size_t k = 0; k < ft.params.size(); k++) ev.args.push_back(es_.stack.word(a.vfp() + argbase + k));
  if (im.name == "gc_scan") {
    bool unscannable = false;
    if (es_.opts.config.tagging == compiler::Tagging::None)
      for (const Activation& x : es_.acts)
        if (flags_kind(es_.stack.word(x.fp + kMetaFlags)) == FrameKind::Jit) unscannable = true;
    if (unscannable) {
      if (es_.opts.strict_scan) return trap_outcome(TrapKind::ScanError, a.func, a.pause_pc, 0);
    } else {
      try {
        ev.roots = scan_roots();
        ev.scanned = true;
      } catch (const ScanError&) {
        return trap_outcome(TrapKind::ScanError, a.func, a.pause_pc, 0);
      }
    }
  } else if (im.name == "make_ref") {
    uint64_t h = static_cast<uint64_t>(static_cast<uint32_t>(ev.args[0])) + 1;
    es_.max_handle = std::max(es_.max_handle, h);
    ev.result = h;
  } else if (im.name == "ref_id") {
    ev.result = ev.args[0] == wasm::kNullRef ? 0xffffffffull : static_cast<uint32_t>(ev.args[0] - 1);
  } else if (im.name == "print") {
    if (es_.opts.print) *es_.opts.print << static_cast<int64_t>(ev.args[0]) << "\n";
  }
  events_.push_back(ev);
  if (host_hook_) host_hook_(*this, events_.back());
  std::optional<TypedValue> v;
  if (ft.result) v = TypedValue{*ft.result, *ev.result};
  deliver(caller, v);
  return std::nullopt;
}

Outcome Machine::trap_outcome(TrapKind k, uint32_t func, uint32_t pc, size_t base) {
  es_.acts.resize(std::min(base, es_.acts.size()));
  Outcome o;
  o.status = Outcome::Status::Trap;
  o.trap = k;
  o.trap_func = func;
  o.trap_pc = pc;
  return o;
}

Outcome Machine::run_loop(size_t base) {
  const wasm::WasmModule& m = es_.module;
  while (true) {
    size_t top = es_.acts.size() - 1;
    FrameKind kind = flags_kind(es_.stack.word(es_.acts[top].fp + kMetaFlags));
    Exit e = kind == FrameKind::Interp ? interp::run(es_, top) : emu::run(es_, top);
    switch (e.kind) {
      case Exit::Kind::Call: {
        es_.counters.calls++;
        if (es_.opts.audit) es_.audit_frame(top);
        if (m.is_import(e.callee)) {
          auto r = call_host(e.callee, top, e.argbase);
          if (r) {
            es_.acts.resize(base);
            return *r;
          }
          break;
        }
        const Activation& a = es_.acts[top];
        if (es_.acts.size() >= kMaxFrames) return trap_outcome(TrapKind::StackOverflow, a.func, a.pause_pc, base);
        size_t n = m.func_type(e.callee).params.size();
        size_t from = a.vfp() + e.argbase;
        std::vector<uint64_t> args(es_.stack.words() + from, es_.stack.words() + from + n);
        std::vector<uint8_t> tags(es_.stack.tags() + from, es_.stack.tags() + from + n);
        push_frame(e.callee, choose_kind(e.callee), args.data(), tags.data());
        break;
      }
      case Exit::Kind::Return: {
        uint32_t func = es_.acts.back().func;
        es_.acts.pop_back();
        auto res = m.func_type(func).result;
        std::optional<TypedValue> v;
        if (res) v = TypedValue{*res, wasm::normalize(*res, e.value)};
        if (es_.acts.size() == base) {
          Outcome o;
          o.value = v;
          return o;
        }
        deliver(es_.acts.size() - 1, v);
        break;
      }
      case Exit::Kind::Trap: {
        if (es_.opts.audit) es_.audit_frame(top);
        return trap_outcome(e.trap, es_.acts[top].func, e.pc, base);
      }
      case Exit::Kind::TierSwitch:
        if (kind == FrameKind::Interp)
          tier_up(top);
        else
          tier_down(top);
        break;
      case Exit::Kind::Limit: {
        es_.acts.resize(base);
        Outcome o;
        o.status = Outcome::Status::Limit;
        return o;
      }
    }
  }
}

void Machine::tier_up(size_t index) {
  Activation& a = es_.acts.at(index);
  uint64_t& flags = es_.stack.word(a.fp + kMetaFlags);
  if (flags_kind(flags) != FrameKind::Interp) throw NoSafepoint("tier_up: frame is already compiled");
  const CompiledFunction& cf = es_.compiled_for(a.func);
  uint32_t vpc = 0;
  if (a.pause == Pause::LoopHeader) {
    auto v = cf.vpc_for_loop(a.pause_pc);
    if (!v) throw NoSafepoint("tier_up: no compiled loop header");
    vpc = *v;
  } else if (a.pause == Pause::Call) {
    const auto& code = cf.code.instrs();
    auto it = std::find_if(code.begin(), code.end(), [&](const visa::Instr& i) {
      return (i.op == visa::VOp::Call || i.op == visa::VOp::HostCall) && i.src_pc == a.pause_pc;
    });
    if (it == code.end()) throw NoSafepoint("tier_up: no compiled call site");
    vpc = static_cast<uint32_t>(it - code.begin()) + 1;
  } else {
    throw NoSafepoint("tier_up: frame is not at a safepoint");
  }
  es_.stack.word(a.fp + kMetaIp) = vpc;
  es_.stack.word(a.fp + kMetaStp) = 0;
  flags = with_kind(flags, FrameKind::Jit);
  es_.counters.tier_ups++;
}

void Machine::tier_down(size_t index) {
  Activation& a = es_.acts.at(index);
  uint64_t& flags = es_.stack.word(a.fp + kMetaFlags);
  if (flags_kind(flags) != FrameKind::Jit) throw NoSafepoint("tier_down: frame is not compiled");
  const CompiledFunction& cf = es_.compiled_for(a.func);
  const wasm::WasmFunction& f = es_.module.defined(a.func);
  uint32_t pc = 0;
  if (a.pause == Pause::Call) {
    uint64_t vpc = es_.stack.word(a.fp + kMetaIp);
    pc = static_cast<uint32_t>(cf.code.at(static_cast<uint32_t>(vpc - 1)).imm);
  } else if (a.pause == Pause::LoopHeader) {
    pc = a.pause_pc;
  } else {
    throw NoSafepoint("tier_down: frame is not at a safepoint");
  }
  auto types = es_.live_types(index);
  for (uint32_t j = 0; j < a.height; j++)
    es_.stack.tag(a.vfp() + j) = static_cast<uint8_t>(wasm::tag_of(types[j]));
  es_.stack.word(a.fp + kMetaIp) = pc;
  es_.stack.word(a.fp + kMetaStp) = f.stp_at(pc);
  flags = with_kind(flags, FrameKind::Interp);
  es_.counters.tier_downs++;
}

void Machine::insert_probe(uint32_t func, uint32_t pc, ProbeFn fn) {
  const wasm::WasmModule& m = es_.module;
  if (func >= m.num_functions() || m.is_import(func) || !wasm::is_instruction_boundary(m, func, pc))
    throw InvalidLocation("insert_probe: " + std::to_string(func) + ":" + std::to_string(pc) +
                          " is not an instruction boundary");
  es_.probes[func][pc].push_back(std::move(fn));
  es_.force_interp[func] = true;
  es_.deopt[func] = true;
}

RootSet Machine::scan_roots() {
  RootSet roots;
  const compiler::Tagging tagging = es_.opts.config.tagging;
  for (size_t i = 0; i < es_.acts.size(); i++) {
    const Activation& a = es_.acts[i];
    FrameKind kind = flags_kind(es_.stack.word(a.fp + kMetaFlags));
    uint32_t nl = es_.module.defined(a.func).num_locals;
    if (kind == FrameKind::Jit && tagging == compiler::Tagging::None)
      throw ScanError("scan_roots: compiled frame without tags");
    std::vector<ValType> types;
    bool reconstruct = kind == FrameKind::Jit && !(compiler::walker_reads_local_tags(tagging) &&
                                                   compiler::walker_reads_operand_tags(tagging));
    if (reconstruct) types = es_.live_types(i);
    for (uint32_t j = 0; j < a.height; j++) {
      bool reads = kind == FrameKind::Interp ||
                   (j < nl ? compiler::walker_reads_local_tags(tagging) : compiler::walker_reads_operand_tags(tagging));
      Tag t;
      if (reads) {
        t = static_cast<Tag>(es_.stack.tag(a.vfp() + j));
        if (t == Tag::Untagged)
          throw ScanError("scan_roots: untagged live slot " + std::to_string(j) + " in frame " + std::to_string(i));
      } else {
        t = wasm::tag_of(types[j]);
      }
      uint64_t v = es_.stack.word(a.vfp() + j);
      if (t == Tag::Ref && v != wasm::kNullRef)
        roots.push_back({static_cast<uint32_t>(i), j, v});
    }
  }
  return roots;
}

void Machine::compile_all() {
  const wasm::WasmModule& m = es_.module;
  for (uint32_t f = m.num_imports(); f < m.num_functions(); f++) es_.compiled_for(f);
}

compiler::StaticMetrics Machine::static_metrics() const {
  compiler::StaticMetrics s;
  for (const auto& c : es_.compiled)
    if (c) s += c->metrics;
  return s;
}

}  // namespace spc::runtime
