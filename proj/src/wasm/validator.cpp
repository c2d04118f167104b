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

#include "spc/wasm/validator.h"

#include "spc/wasm/errors.h"
#include "spc/wasm/opcodes.h"

namespace spc::wasm {

namespace {

constexpr uint32_t kMaxLocals = 50000;
constexpr uint8_t kUnknown = 0;

enum class CtrlKind : uint8_t { Func, Block, Loop, If, Else };

struct CtrlFrame {
  CtrlKind kind;
  std::optional<ValType> result;
  uint32_t height;
  bool unreachable;
  uint32_t start_pc;
  uint32_t start_stp;
  uint32_t if_entry;  // sidetable index of the if's false edge
  std::vector<uint32_t> pending;  // entries waiting for the end target
};

using Observer = std::function<bool(uint32_t pc, const std::vector<uint8_t>& stack, bool reachable)>;

struct Result {
  std::vector<LocalDecl> decls;
  std::vector<ValType> local_types;
  uint32_t code_offset = 0;
  std::vector<SidetableEntry> sidetable;
  uint32_t max_height = 0;
};

class FunctionValidator {
 public:
  FunctionValidator(const WasmModule& m, uint32_t func, ReadTracker* tracker, Observer observer)
      : m_(m),
        f_(m.defined(func)),
        func_(func),
        c_(*m.bytes, f_.body_offset, f_.body_offset + f_.body_size, tracker),
        observer_(std::move(observer)) {}

  Result run() {
    const FuncType& sig = m_.types[f_.type_index];
    r_.local_types = sig.params;
    uint32_t ndecl = c_.u32_leb();
    uint64_t total = sig.params.size();
    for (uint32_t i = 0; i < ndecl; i++) {
      uint32_t n = c_.u32_leb();
      size_t at = c_.pos();
      auto t = valtype_from_byte(c_.u8());
      if (!t) throw MalformedModule(at, "invalid local type");
      total += n;
      if (total > kMaxLocals) throw MalformedModule(at, "too many locals");
      r_.decls.push_back({n, *t});
      r_.local_types.insert(r_.local_types.end(), n, *t);
    }
    r_.code_offset = pc();
    ctrl_.push_back({CtrlKind::Func, sig.result, 0, false, pc(), 0, 0, {}});
    while (!ctrl_.empty()) {
      if (c_.at_end()) fail("function body must end with end");
      uint32_t at = pc();
      if (observer_ && !observer_(at, stack_, !ctrl_.back().unreachable)) return std::move(r_);
      step(at);
    }
    if (!c_.at_end()) fail("trailing bytes after function end");
    return std::move(r_);
  }

 private:
  uint32_t pc() const { return static_cast<uint32_t>(c_.pos() - f_.body_offset); }

  [[noreturn]] void fail(const std::string& reason) { throw ValidationError(func_, cur_pc_, reason); }

  void push(uint8_t t) {
    stack_.push_back(t);
    if (stack_.size() > r_.max_height) r_.max_height = static_cast<uint32_t>(stack_.size());
  }
  void push(ValType t) { push(static_cast<uint8_t>(t)); }

  uint8_t pop() {
    CtrlFrame& f = ctrl_.back();
    if (stack_.size() == f.height) {
      if (f.unreachable) return kUnknown;
      fail("stack underflow");
    }
    uint8_t t = stack_.back();
    stack_.pop_back();
    return t;
  }

  uint8_t pop(ValType expect) {
    uint8_t t = pop();
    if (t != kUnknown && t != static_cast<uint8_t>(expect))
      fail(std::string("type mismatch: expected ") + std::string(valtype_name(expect)) + ", got " +
           std::string(valtype_name(static_cast<ValType>(t))));
    return t;
  }

  void set_unreachable() {
    CtrlFrame& f = ctrl_.back();
    stack_.resize(f.height);
    f.unreachable = true;
  }

  std::optional<ValType> block_type() {
    size_t at = c_.pos();
    uint8_t b = c_.u8();
    if (b == 0x40) return std::nullopt;
    auto t = valtype_from_byte(b);
    if (!t) throw MalformedModule(at, "unsupported block type");
    return t;
  }

  CtrlFrame& label(uint32_t depth) {
    if (depth >= ctrl_.size()) fail("unbound label");
    return ctrl_[ctrl_.size() - 1 - depth];
  }

  // Arity carried by a branch to the frame.
  static uint32_t label_arity(const CtrlFrame& f) {
    return (f.kind == CtrlKind::Loop || !f.result) ? 0 : 1;
  }

  void add_entry(CtrlFrame& target, uint32_t branch_pc) {
    SidetableEntry e;
    e.branch_pc = branch_pc;
    e.val_count = label_arity(target);
    uint32_t h = static_cast<uint32_t>(stack_.size());
    uint32_t keep = target.height + e.val_count;
    e.pop_count = (!ctrl_.back().unreachable && h >= keep) ? h - keep : 0;
    if (target.kind == CtrlKind::Loop) {
      e.target_pc = target.start_pc;
      e.target_stp = target.start_stp;
    } else {
      target.pending.push_back(static_cast<uint32_t>(r_.sidetable.size()));
    }
    r_.sidetable.push_back(e);
  }

  void patch_pending(CtrlFrame& f, uint32_t target_pc) {
    uint32_t stp = static_cast<uint32_t>(r_.sidetable.size());
    for (uint32_t idx : f.pending) {
      r_.sidetable[idx].target_pc = target_pc;
      r_.sidetable[idx].target_stp = stp;
    }
    f.pending.clear();
    f.pending.shrink_to_fit();
  }

  void pop_label_values(const CtrlFrame& target) {
    if (label_arity(target)) pop(*target.result);
  }

  void check_frame_end(CtrlFrame& f) {
    if (f.result) pop(*f.result);
    if (stack_.size() != f.height) fail("type mismatch: values remaining on stack at end of block");
  }

  void mem_arg(uint32_t natural) {
    if (!m_.memory) fail("memory instruction without memory");
    uint32_t align = c_.u32_leb();
    if (align >= 32 || (1u << align) > natural) fail("alignment must not be larger than natural");
    c_.u32_leb();
  }

  void step(uint32_t at) {
    cur_pc_ = at;
    size_t op_pos = c_.pos();
    uint8_t byte = c_.u8();
    auto op_opt = opcode_from_byte(byte);
    if (!op_opt) throw MalformedModule(op_pos, "unsupported opcode 0x" + hex(byte));
    Opcode op = *op_opt;
    switch (op) {
      case Opcode::Unreachable: set_unreachable(); break;
      case Opcode::Nop: break;
      case Opcode::Block:
      case Opcode::Loop: {
        auto bt = block_type();
        CtrlKind k = op == Opcode::Block ? CtrlKind::Block : CtrlKind::Loop;
        ctrl_.push_back({k, bt, static_cast<uint32_t>(stack_.size()), false, at,
                         static_cast<uint32_t>(r_.sidetable.size()), 0, {}});
        break;
      }
      case Opcode::If: {
        auto bt = block_type();
        pop(ValType::I32);
        uint32_t idx = static_cast<uint32_t>(r_.sidetable.size());
        SidetableEntry e;
        e.branch_pc = at;
        r_.sidetable.push_back(e);
        ctrl_.push_back({CtrlKind::If, bt, static_cast<uint32_t>(stack_.size()), false, at, 0, idx, {}});
        break;
      }
      case Opcode::Else: {
        CtrlFrame& f = ctrl_.back();
        if (f.kind != CtrlKind::If) fail("else without matching if");
        check_frame_end(f);
        // Then-arm fallthrough jumps over the else arm.
        uint32_t idx = static_cast<uint32_t>(r_.sidetable.size());
        SidetableEntry e;
        e.branch_pc = at;
        e.val_count = f.result ? 1 : 0;
        r_.sidetable.push_back(e);
        f.pending.push_back(idx);
        SidetableEntry& fe = r_.sidetable[f.if_entry];
        fe.target_pc = pc();
        fe.target_stp = static_cast<uint32_t>(r_.sidetable.size());
        f.kind = CtrlKind::Else;
        f.unreachable = false;
        break;
      }
      case Opcode::End: {
        CtrlFrame& f = ctrl_.back();
        check_frame_end(f);
        if (f.kind == CtrlKind::If) {
          if (f.result) fail("type mismatch: if without else must not produce a value");
          SidetableEntry& fe = r_.sidetable[f.if_entry];
          fe.target_pc = pc();
          fe.target_stp = static_cast<uint32_t>(r_.sidetable.size());
        }
        patch_pending(f, pc());
        auto result = f.result;
        ctrl_.pop_back();
        if (result) push(*result);
        break;
      }
      case Opcode::Br: {
        uint32_t d = c_.u32_leb();
        CtrlFrame& t = label(d);
        pop_label_values(t);
        push_back_label_values(t);
        add_entry(t, at);
        set_unreachable();
        break;
      }
      case Opcode::BrIf: {
        uint32_t d = c_.u32_leb();
        pop(ValType::I32);
        CtrlFrame& t = label(d);
        pop_label_values(t);
        push_back_label_values(t);
        add_entry(t, at);
        break;
      }
      case Opcode::BrTable: {
        uint32_t n = c_.u32_leb();
        if (n > 1000000) fail("br_table too large");
        std::vector<uint32_t> depths(n + 1);
        for (uint32_t i = 0; i <= n; i++) depths[i] = c_.u32_leb();
        pop(ValType::I32);
        uint32_t arity = label_arity(label(depths[n]));
        for (uint32_t d : depths) {
          CtrlFrame& t = label(d);
          if (label_arity(t) != arity) fail("type mismatch: br_table targets have inconsistent arity");
          if (arity) {
            ValType want = *t.result;
            uint8_t top = stack_.size() > ctrl_.back().height ? stack_.back() : kUnknown;
            if (top != kUnknown && top != static_cast<uint8_t>(want)) fail("type mismatch in br_table target");
            if (top == kUnknown && !ctrl_.back().unreachable) fail("stack underflow");
          }
        }
        for (uint32_t d : depths) add_entry(label(d), at);
        set_unreachable();
        break;
      }
      case Opcode::Return: {
        const CtrlFrame& f = ctrl_.front();
        if (f.result) pop(*f.result);
        set_unreachable();
        break;
      }
      case Opcode::Call: {
        uint32_t idx = c_.u32_leb();
        if (idx >= m_.num_functions()) fail("function index out of bounds");
        const FuncType& t = m_.func_type(idx);
        for (size_t i = t.params.size(); i-- > 0;) pop(t.params[i]);
        if (t.result) push(*t.result);
        break;
      }
      case Opcode::Drop: pop(); break;
      case Opcode::Select: {
        pop(ValType::I32);
        uint8_t a = pop();
        uint8_t b = pop();
        if (a == static_cast<uint8_t>(ValType::Ref) || b == static_cast<uint8_t>(ValType::Ref))
          fail("type mismatch: untyped select requires numeric operands");
        if (a != kUnknown && b != kUnknown && a != b) fail("type mismatch in select");
        push(a != kUnknown ? a : b);
        break;
      }
      case Opcode::SelectT: {
        uint32_t n = c_.u32_leb();
        if (n != 1) fail("typed select requires exactly one type");
        size_t tat = c_.pos();
        auto t = valtype_from_byte(c_.u8());
        if (!t) throw MalformedModule(tat, "invalid value type");
        pop(ValType::I32);
        pop(*t);
        pop(*t);
        push(*t);
        break;
      }
      case Opcode::LocalGet:
      case Opcode::LocalSet:
      case Opcode::LocalTee: {
        uint32_t idx = c_.u32_leb();
        if (idx >= r_.local_types.size()) fail("local index out of bounds");
        ValType t = r_.local_types[idx];
        if (op == Opcode::LocalGet) {
          push(t);
        } else {
          pop(t);
          if (op == Opcode::LocalTee) push(t);
        }
        break;
      }
      case Opcode::GlobalGet:
      case Opcode::GlobalSet: {
        uint32_t idx = c_.u32_leb();
        if (idx >= m_.globals.size()) fail("global index out of bounds");
        const Global& g = m_.globals[idx];
        if (op == Opcode::GlobalGet) {
          push(g.type);
        } else {
          if (!g.mutable_) fail("global is immutable");
          pop(g.type);
        }
        break;
      }
      case Opcode::MemorySize:
      case Opcode::MemoryGrow: {
        if (!m_.memory) fail("memory instruction without memory");
        size_t rat = c_.pos();
        if (c_.u8() != 0) throw MalformedModule(rat, "zero byte expected");
        if (op == Opcode::MemoryGrow) pop(ValType::I32);
        push(ValType::I32);
        break;
      }
      case Opcode::I32Const: c_.i32_leb(); push(ValType::I32); break;
      case Opcode::I64Const: c_.i64_leb(); push(ValType::I64); break;
      case Opcode::F32Const: c_.fixed32(); push(ValType::F32); break;
      case Opcode::F64Const: c_.fixed64(); push(ValType::F64); break;
      case Opcode::RefNull: {
        size_t rat = c_.pos();
        if (c_.u8() != 0x6f) throw MalformedModule(rat, "unsupported reference type");
        push(ValType::Ref);
        break;
      }
      case Opcode::RefIsNull: pop(ValType::Ref); push(ValType::I32); break;
      default: {
        if (auto mi = mem_access_info(op)) {
          mem_arg(mi->width);
          if (mi->store) {
            pop(mi->type);
            pop(ValType::I32);
          } else {
            pop(ValType::I32);
            push(mi->type);
          }
        } else if (auto bi = binary_int_info(op)) {
          pop(bi->type);
          pop(bi->type);
          push(bi->type);
        } else if (auto ci = compare_info(op)) {
          pop(ci->operand);
          if (!ci->unary) pop(ci->operand);
          push(ValType::I32);
        } else if (auto fi = binary_float_info(op)) {
          pop(fi->type);
          pop(fi->type);
          push(fi->type);
        } else if (auto ui = unary_float_info(op)) {
          pop(ui->type);
          push(ui->type);
        } else if (auto cv = conversion_info(op)) {
          pop(cv->from);
          push(cv->to);
        } else {
          throw MalformedModule(op_pos, "unsupported opcode");
        }
      }
    }
  }

  void push_back_label_values(const CtrlFrame& target) {
    if (label_arity(target)) push(*target.result);
  }

  static std::string hex(uint8_t b) {
    static const char* d = "0123456789abcdef";
    return std::string{d[b >> 4], d[b & 15]};
  }

  const WasmModule& m_;
  const WasmFunction& f_;
  uint32_t func_;
  Cursor c_;
  Observer observer_;
  Result r_;
  std::vector<uint8_t> stack_;
  std::vector<CtrlFrame> ctrl_;
  uint32_t cur_pc_ = 0;
};

}  // namespace

void validate_function(WasmModule& module, uint32_t func, ReadTracker* tracker) {
  Result r = FunctionValidator(module, func, tracker, nullptr).run();
  WasmFunction& f = module.defined(func);
  const FuncType& sig = module.types[f.type_index];
  f.local_decls = std::move(r.decls);
  f.local_types = std::move(r.local_types);
  f.code_offset = r.code_offset;
  f.sidetable = std::move(r.sidetable);
  f.max_stack_height = r.max_height;
  f.num_params = static_cast<uint32_t>(sig.params.size());
  f.num_locals = static_cast<uint32_t>(f.local_types.size());
  f.validated = true;
}

const std::vector<WasmFunction>& validate(WasmModule& module) {
  for (const auto& e : module.exports)
    if (e.kind == ExportKind::Func && e.index >= module.num_functions())
      throw ValidationError(e.index, 0, "exported function index out of bounds");
  for (uint32_t i = 0; i < module.functions.size(); i++) validate_function(module, module.num_imports() + i);
  return module.functions;
}

std::optional<std::vector<ValType>> operand_types_at(const WasmModule& module, uint32_t func, uint32_t pc) {
  std::optional<std::vector<ValType>> out;
  FunctionValidator(module, func, nullptr,
                    [&](uint32_t at, const std::vector<uint8_t>& stack, bool reachable) {
                      if (at < pc) return true;
                      if (at == pc && reachable) {
                        std::vector<ValType> types;
                        types.reserve(stack.size());
                        for (uint8_t t : stack) types.push_back(static_cast<ValType>(t));
                        out = std::move(types);
                      }
                      return false;
                    })
      .run();
  return out;
}

bool is_instruction_boundary(const WasmModule& module, uint32_t func, uint32_t pc) {
  bool found = false;
  FunctionValidator(module, func, nullptr, [&](uint32_t at, const std::vector<uint8_t>&, bool) {
    if (at == pc) found = true;
    return at < pc;
  }).run();
  return found;
}

std::optional<std::span<const ValType>> TypeMap::at(uint32_t pc) const {
  if (pc >= index.size() || index[pc] < 0) return std::nullopt;
  return std::span<const ValType>(types).subspan(static_cast<size_t>(index[pc]), heights[pc]);
}

TypeMap build_type_map(const WasmModule& module, uint32_t func) {
  const WasmFunction& f = module.defined(func);
  TypeMap map;
  map.index.assign(f.body_size + 1, -1);
  map.heights.assign(f.body_size + 1, 0);
  FunctionValidator(module, func, nullptr, [&](uint32_t at, const std::vector<uint8_t>& stack, bool reachable) {
    if (reachable) {
      map.index[at] = static_cast<int32_t>(map.types.size());
      map.heights[at] = static_cast<uint32_t>(stack.size());
      for (uint8_t t : stack) map.types.push_back(static_cast<ValType>(t));
    }
    return true;
  }).run();
  return map;
}

}  // namespace spc::wasm
