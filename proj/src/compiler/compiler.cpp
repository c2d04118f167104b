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

#include "spc/compiler/compiler.h"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "spc/compiler/abstract_state.h"
#include "spc/wasm/numeric.h"
#include "spc/wasm/opcodes.h"
#include "spc/wasm/validator.h"

namespace spc::compiler {

using visa::Instr;
using visa::kNoReg;
using visa::Label;
using visa::Reg;
using visa::VOp;
using wasm::Cond;
using wasm::Opcode;
using wasm::Tag;
using wasm::TrapKind;
using wasm::ValType;

StaticMetrics& StaticMetrics::operator+=(const StaticMetrics& o) {
  code_bytes_in += o.code_bytes_in;
  code_bytes_out += o.code_bytes_out;
  instrs_emitted += o.instrs_emitted;
  moves_emitted += o.moves_emitted;
  spills_emitted += o.spills_emitted;
  tag_stores_emitted += o.tag_stores_emitted;
  compile_ns += o.compile_ns;
  return *this;
}

StaticMetrics count_static(const visa::CodeBuffer& code) {
  StaticMetrics m;
  m.instrs_emitted = code.size();
  m.code_bytes_out = static_cast<uint64_t>(code.size()) * visa::kInstrBytes;
  for (const Instr& i : code.instrs()) {
    switch (i.op) {
      case VOp::MovRR:
      case VOp::MovRI: m.moves_emitted++; break;
      case VOp::StoreSlot:
      case VOp::StoreSlotImm: m.spills_emitted++; break;
      case VOp::StoreTag: m.tag_stores_emitted++; break;
      default: break;
    }
  }
  return m;
}

std::optional<uint32_t> CompiledFunction::vpc_for_loop(uint32_t wasm_pc) const {
  for (const LoopHeader& h : loops)
    if (h.wasm_pc == wasm_pc) return h.vpc;
  return std::nullopt;
}

namespace {


Instr mk(VOp op) {
  Instr i;
  i.op = op;
  return i;
}

Reg ret_reg(ValType t) { return wasm::is_float(t) ? visa::kX0 : visa::kR0; }
Reg scratch_reg(ValType t) { return wasm::is_float(t) ? visa::kXT : visa::kRT; }
bool wide_type(ValType t) { return !wasm::is_narrow(t); }

uint64_t all_ones(bool wide) { return wide ? ~0ull : 0xffffffffull; }

// Immediate operand for a reg-imm ALU or compare form.
std::optional<int64_t> alu_imm(bool wide, uint64_t k) {
  if (!wide) return static_cast<int32_t>(static_cast<uint32_t>(k));
  auto v = static_cast<int64_t>(k);
  if (visa::fits_imm32(v)) return v;
  return std::nullopt;
}

struct CondDesc {
  bool is_konst = false;
  bool value = false;
  VOp op = VOp::BrCCImm;
  Cond cond = Cond::Ne;
  Reg b = kNoReg;
  Reg c = kNoReg;
  int64_t imm = 0;
  bool wide = false;
};

struct PendingCompare {
  bool valid = false;
  uint32_t end = 0;
  uint32_t slot = 0;
  CondDesc desc;
};

struct TrapStub {
  Label label = visa::kNoLabel;
  std::vector<Instr> code;
  uint32_t pc = 0;
};

using FixList = std::vector<std::pair<uint32_t, AbstractValue>>;

struct Control {
  enum class Kind { Func, Block, Loop, If } kind = Kind::Block;
  std::optional<ValType> result;
  uint32_t height = 0;
  uint32_t wasm_pc = 0;
  // Forward label of the current arrival group.
  Label label = visa::kNoLabel;
  bool has_merge = false;
  StateSnapshot merge;
  std::vector<Label> groups;
  std::vector<FixList> fixes;
  // if
  bool in_else = false;
  bool else_reachable = false;
  StateSnapshot else_state;
  Label else_label = visa::kNoLabel;
  bool parked = false;
  StateSnapshot parked_state;
  // loop
  StateSnapshot loop_state;
  Label loop_label = visa::kNoLabel;

  uint32_t arity() const { return kind == Kind::Loop ? 0 : (result ? 1 : 0); }
};

// Positions [0, h) of a branch target, read from the current state.
struct View {
  uint32_t h = 0;      // label height
  uint32_t arity = 0;  // carried values
  uint32_t top = 0;    // slot of the carried value
  uint32_t size() const { return h + arity; }
  uint32_t src(uint32_t j) const { return j < h ? j : top; }
};

class FunctionCompiler {
 public:
  FunctionCompiler(const wasm::WasmModule& m, uint32_t func, const CompilerConfig& cfg, wasm::ReadTracker* tracker)
      : m_(m),
        f_(m.defined(func)),
        cfg_(cfg),
        c_(std::span<const uint8_t>(*m.bytes), f_.body_offset, f_.body_offset + f_.body_size, tracker),
        st_(f_.num_locals, f_.frame_slots() + 1, cfg.multi_reg) {
    out_.func = func;
    out_.config = cfg;
    out_.num_locals = f_.num_locals;
    out_.frame_slots = f_.frame_slots();
  }

  CompiledFunction run() {
    if (!f_.validated) throw std::logic_error("compile_function: function not validated");
    if (!cfg_.well_formed()) throw std::logic_error("compile_function: ill-formed config");
    read_locals();
    prologue();
    Control fc;
    fc.kind = Control::Kind::Func;
    fc.result = m_.func_type(out_.func).result;
    fc.height = f_.num_locals;
    ctrl_.push_back(std::move(fc));
    while (!ctrl_.empty()) {
      pc_ = static_cast<uint32_t>(c_.pos() - f_.body_offset);
      buf_.set_src_pc(pc_);
      uint8_t byte = c_.u8();
      auto op = wasm::opcode_from_byte(byte);
      if (!op) throw std::logic_error("compile_function: unsupported opcode");
      if (!reachable_) {
        dead(*op);
      } else {
        compile(*op);
        if (cfg_.check_invariants && reachable_ && !st_.consistent())
          throw std::logic_error("abstract state inconsistent at pc " + std::to_string(pc_));
      }
    }
    for (TrapStub& s : stubs_) {
      buf_.bind(s.label);
      for (const Instr& i : s.code) buf_.emit(i);
    }
    buf_.finalize();

    out_.header_at_vpc.assign(buf_.size() + 1, -1);
    for (const LoopHeader& h : out_.loops)
      if (out_.header_at_vpc[h.vpc] < 0) out_.header_at_vpc[h.vpc] = h.wasm_pc;
    out_.code = std::move(buf_);
    out_.metrics = count_static(out_.code);
    out_.metrics.code_bytes_in = f_.body_size;
    return std::move(out_);
  }

 private:
  const wasm::WasmModule& m_;
  const wasm::WasmFunction& f_;
  CompilerConfig cfg_;
  wasm::Cursor c_;
  AbstractState st_;
  visa::CodeBuffer buf_;
  CompiledFunction out_;
  std::vector<Control> ctrl_;
  std::vector<TrapStub> stubs_;
  PendingCompare pending_;
  bool reachable_ = true;
  uint32_t dead_depth_ = 0;
  uint32_t pc_ = 0;
  uint32_t live_snapshots_ = 0;

  // ---- tag policy ----

  bool is_local(uint32_t j) const { return j < f_.num_locals; }
  bool reads_tag(uint32_t j) const {
    return is_local(j) ? walker_reads_local_tags(cfg_.tagging) : walker_reads_operand_tags(cfg_.tagging);
  }
  bool eager_tag(uint32_t j) const {
    return is_local(j) ? eager_local_tags(cfg_.tagging) : eager_operand_tags(cfg_.tagging);
  }
  bool tracked_tag(uint32_t j) const { return reads_tag(j) || eager_tag(j); }

  void snapshot_taken() { out_.max_live_snapshots = std::max(out_.max_live_snapshots, ++live_snapshots_); }
  void snapshot_dropped() { live_snapshots_--; }

  // ---- emission helpers ----

  void emit(const Instr& i) { buf_.emit(i); }

  static Instr mov_rr(Reg d, Reg s) {
    Instr i = mk(VOp::MovRR);
    i.a = d;
    i.b = s;
    return i;
  }
  static Instr mov_ri(Reg d, uint64_t k) {
    Instr i = mk(VOp::MovRI);
    i.a = d;
    i.imm = static_cast<int64_t>(k);
    return i;
  }
  static Instr load_slot(Reg d, uint32_t s) {
    Instr i = mk(VOp::LoadSlot);
    i.a = d;
    i.slot = s;
    return i;
  }
  static Instr store_slot(Reg r, uint32_t s) {
    Instr i = mk(VOp::StoreSlot);
    i.a = r;
    i.slot = s;
    return i;
  }
  static Instr store_tag(uint32_t s, ValType t) {
    Instr i = mk(VOp::StoreTag);
    i.slot = s;
    i.sub = static_cast<uint8_t>(wasm::tag_of(t));
    return i;
  }

  void store_konst(std::vector<Instr>& out, uint32_t s, ValType t, uint64_t k) const {
    auto v = static_cast<int64_t>(k);
    if (cfg_.isel_imm && visa::fits_imm32(v)) {
      Instr i = mk(VOp::StoreSlotImm);
      i.slot = s;
      i.imm = v;
      out.push_back(i);
    } else {
      out.push_back(mov_ri(scratch_reg(t), k));
      out.push_back(store_slot(scratch_reg(t), s));
    }
  }

  // Stores the value of slot s into frame slot j (j may differ from s).
  void store_value(std::vector<Instr>& out, uint32_t s, uint32_t j) const {
    const AbstractValue& v = st_.slot(s);
    if (v.reg != kNoReg) {
      out.push_back(store_slot(v.reg, j));
    } else if (v.has_konst) {
      store_konst(out, j, v.type, v.konst);
    } else {
      if (!v.stored) throw std::logic_error("slot not materializable");
      if (s == j) return;
      out.push_back(load_slot(scratch_reg(v.type), s));
      out.push_back(store_slot(scratch_reg(v.type), j));
    }
  }

  void emit_all(const std::vector<Instr>& is) {
    for (const Instr& i : is) emit(i);
  }

  void on_write(uint32_t j) {
    if (!eager_tag(j)) return;
    ValType t = st_.slot(j).type;
    emit(store_tag(j, t));
    st_.set_tag_mem(j, wasm::tag_of(t));
  }

  // Brings slot s into a register.
  Reg materialize(uint32_t s, RegMask locked = 0) {
    if (st_.slot(s).reg != kNoReg) return st_.slot(s).reg;
    ValType t = st_.slot(s).type;
    Reg r = st_.alloc_reg(t, buf_, locked);
    const AbstractValue& v = st_.slot(s);
    if (v.has_konst)
      emit(mov_ri(r, v.konst));
    else
      emit(load_slot(r, s));
    st_.bind(s, r);
    return r;
  }

  Reg alloc(ValType t, RegMask locked = 0) { return st_.alloc_reg(t, buf_, locked); }

  void push_reg(ValType t, Reg r) {
    uint32_t s = st_.push(t);
    st_.bind(s, r);
    on_write(s);
  }

  void push_konst(ValType t, uint64_t k) {
    k = wasm::normalize(t, k);
    if (cfg_.track_consts) {
      uint32_t s = st_.push(t);
      st_.slot(s).has_konst = true;
      st_.slot(s).konst = k;
      on_write(s);
      return;
    }
    Reg r = alloc(t);
    emit(mov_ri(r, k));
    push_reg(t, r);
  }

  // Replaces the top two slots with the value held by one of them.
  void keep_operand(bool keep_a) {
    uint32_t top = st_.height() - 1;
    AbstractValue v = st_.slot(keep_a ? top - 1 : top);
    uint32_t from = keep_a ? top - 1 : top;
    if (keep_a) {
      st_.pop();
      return;
    }
    st_.pop();
    st_.pop();
    uint32_t s = st_.push(v.type);
    if (v.reg != kNoReg) {
      st_.bind(s, v.reg);
    } else if (v.has_konst) {
      st_.slot(s).has_konst = true;
      st_.slot(s).konst = v.konst;
    } else {
      Reg r = alloc(v.type);
      emit(load_slot(r, from));
      st_.bind(s, r);
    }
    on_write(s);
  }

  // Code that makes slots [0, live) observable: values stored and, where the
  // stack walker reads them, tags stored. With commit, the state records it.
  void observe(std::vector<Instr>& out, uint32_t live, bool commit) {
    for (uint32_t j = 0; j < live; j++) {
      AbstractValue& v = st_.slot(j);
      if (!v.stored) {
        store_value(out, j, j);
        if (commit) v.stored = true;
      }
    }
    for (uint32_t j = 0; j < live; j++) tag_for_observation(out, j, commit, reads_tag(j));
  }

  void tag_for_observation(std::vector<Instr>& out, uint32_t j, bool commit, bool needed) {
    if (!needed) return;
    ValType t = st_.slot(j).type;
    if (st_.tag_mem(j) == wasm::tag_of(t)) return;
    out.push_back(store_tag(j, t));
    if (commit) st_.set_tag_mem(j, wasm::tag_of(t));
  }

  // Out-of-line path for a trapping instruction that consumes the top
  // `consumed` operands.
  Label trap_stub(uint32_t consumed) {
    TrapStub s;
    s.label = buf_.new_label();
    s.pc = pc_;
    observe(s.code, st_.height() - consumed, false);
    Instr t = mk(VOp::Trap);
    t.sub = static_cast<uint8_t>(TrapKind::None);
    t.aux = pc_;
    t.slot = st_.height() - consumed;
    s.code.push_back(t);
    Label l = s.label;
    stubs_.push_back(std::move(s));
    return l;
  }

  // ---- locals and prologue ----

  void read_locals() {
    uint32_t groups = c_.u32_leb();
    for (uint32_t g = 0; g < groups; g++) {
      c_.u32_leb();
      c_.u8();
    }
  }

  void prologue() {
    for (uint32_t j = 0; j < f_.num_locals; j++) {
      AbstractValue& v = st_.slot(j);
      v = AbstractValue{};
      v.type = f_.local_types[j];
      if (j < f_.num_params) {
        v.stored = true;
        if (tracked_tag(j)) st_.set_tag_mem(j, wasm::tag_of(v.type));
      } else if (cfg_.track_consts) {
        v.has_konst = true;
        v.konst = 0;
      } else {
        v.stored = true;
      }
    }
    if (!cfg_.track_consts && f_.num_locals > f_.num_params) {
      emit(mov_ri(visa::kRT, 0));
      for (uint32_t j = f_.num_params; j < f_.num_locals; j++) emit(store_slot(visa::kRT, j));
    }
    if (eager_local_tags(cfg_.tagging)) {
      for (uint32_t j = f_.num_params; j < f_.num_locals; j++) {
        emit(store_tag(j, f_.local_types[j]));
        st_.set_tag_mem(j, wasm::tag_of(f_.local_types[j]));
      }
    }
  }

  // ---- dead code ----

  void skip_immediates(Opcode op) {
    switch (op) {
      case Opcode::Block:
      case Opcode::Loop:
      case Opcode::If: c_.u8(); break;
      case Opcode::Br:
      case Opcode::BrIf:
      case Opcode::Call:
      case Opcode::LocalGet:
      case Opcode::LocalSet:
      case Opcode::LocalTee:
      case Opcode::GlobalGet:
      case Opcode::GlobalSet: c_.u32_leb(); break;
      case Opcode::BrTable: {
        uint32_t n = c_.u32_leb();
        for (uint32_t k = 0; k <= n; k++) c_.u32_leb();
        break;
      }
      case Opcode::SelectT: {
        uint32_t n = c_.u32_leb();
        for (uint32_t k = 0; k < n; k++) c_.u8();
        break;
      }
      case Opcode::MemorySize:
      case Opcode::MemoryGrow:
      case Opcode::RefNull: c_.u8(); break;
      case Opcode::I32Const: c_.i32_leb(); break;
      case Opcode::I64Const: c_.i64_leb(); break;
      case Opcode::F32Const: c_.fixed32(); break;
      case Opcode::F64Const: c_.fixed64(); break;
      default:
        if (wasm::mem_access_info(op)) {
          c_.u32_leb();
          c_.u32_leb();
        }
        break;
    }
  }

  void dead(Opcode op) {
    skip_immediates(op);
    switch (op) {
      case Opcode::Block:
      case Opcode::Loop:
      case Opcode::If: dead_depth_++; return;
      case Opcode::Else:
        if (dead_depth_ == 0) do_else();
        return;
      case Opcode::End:
        if (dead_depth_ > 0)
          dead_depth_--;
        else
          do_end();
        return;
      default: return;
    }
  }

  // ---- dispatch ----

  void compile(Opcode op) {
    if (op != Opcode::BrIf && op != Opcode::If) pending_.valid = false;
    switch (op) {
      case Opcode::Unreachable: {
        std::vector<Instr> code;
        observe(code, st_.height(), true);
        emit_all(code);
        Instr t = mk(VOp::Trap);
        t.sub = static_cast<uint8_t>(TrapKind::Unreachable);
        t.aux = pc_;
        t.slot = st_.height();
        emit(t);
        reachable_ = false;
        return;
      }
      case Opcode::Nop: return;
      case Opcode::Block: return do_block(Control::Kind::Block, block_type());
      case Opcode::Loop: return do_loop(block_type());
      case Opcode::If: return do_if(block_type());
      case Opcode::Else: return do_else();
      case Opcode::End: return do_end();
      case Opcode::Br: return do_br(c_.u32_leb());
      case Opcode::BrIf: return do_br_if(c_.u32_leb());
      case Opcode::BrTable: return do_br_table();
      case Opcode::Return: {
        emit_return();
        reachable_ = false;
        return;
      }
      case Opcode::Call: return do_call(c_.u32_leb());
      case Opcode::Drop: st_.pop(); return;
      case Opcode::Select: return do_select();
      case Opcode::SelectT: {
        uint32_t n = c_.u32_leb();
        for (uint32_t k = 0; k < n; k++) c_.u8();
        return do_select();
      }
      case Opcode::LocalGet: return do_local_get(c_.u32_leb());
      case Opcode::LocalSet: return do_local_set(c_.u32_leb(), false);
      case Opcode::LocalTee: return do_local_set(c_.u32_leb(), true);
      case Opcode::GlobalGet: {
        uint32_t g = c_.u32_leb();
        ValType t = m_.globals.at(g).type;
        Reg r = alloc(t);
        Instr i = mk(VOp::GlobalLoad);
        i.a = r;
        i.aux = g;
        emit(i);
        push_reg(t, r);
        return;
      }
      case Opcode::GlobalSet: {
        uint32_t g = c_.u32_leb();
        uint32_t s = st_.height() - 1;
        Reg r = value_reg(s);
        Instr i = mk(VOp::GlobalStore);
        i.a = r;
        i.aux = g;
        emit(i);
        st_.pop();
        return;
      }
      case Opcode::MemorySize: {
        c_.u8();
        Reg r = alloc(ValType::I32);
        Instr i = mk(VOp::MemSize);
        i.a = r;
        emit(i);
        push_reg(ValType::I32, r);
        return;
      }
      case Opcode::MemoryGrow: {
        c_.u8();
        uint32_t s = st_.height() - 1;
        Reg d = materialize(s);
        Reg r = alloc(ValType::I32, reg_bit(d));
        Instr i = mk(VOp::MemGrow);
        i.a = r;
        i.b = d;
        emit(i);
        st_.pop();
        push_reg(ValType::I32, r);
        return;
      }
      case Opcode::I32Const: push_konst(ValType::I32, static_cast<uint32_t>(c_.i32_leb())); return;
      case Opcode::I64Const: push_konst(ValType::I64, static_cast<uint64_t>(c_.i64_leb())); return;
      case Opcode::F32Const: push_konst(ValType::F32, c_.fixed32()); return;
      case Opcode::F64Const: push_konst(ValType::F64, c_.fixed64()); return;
      case Opcode::RefNull: c_.u8(); push_konst(ValType::Ref, wasm::kNullRef); return;
      case Opcode::RefIsNull: return do_compare(Cond::Eq, ValType::Ref, true);
      default: break;
    }
    if (auto bi = wasm::binary_int_info(op)) return do_int_binop(bi->op, bi->type);
    if (auto ci = wasm::compare_info(op)) return do_compare(ci->cond, ci->operand, ci->unary);
    if (auto fi = wasm::binary_float_info(op)) return do_float_binop(fi->op, fi->type);
    if (auto ui = wasm::unary_float_info(op)) return do_float_unop(ui->op, ui->type);
    if (auto vi = wasm::conversion_info(op)) return do_conversion(*vi);
    if (auto mi = wasm::mem_access_info(op)) {
      c_.u32_leb();
      uint32_t offset = c_.u32_leb();
      return mi->store ? do_store(*mi, offset) : do_load(*mi, offset);
    }
    throw std::logic_error("compile_function: unhandled opcode " + std::string(wasm::opcode_name(op)));
  }

  std::optional<ValType> block_type() {
    uint8_t b = c_.u8();
    if (b == 0x40) return std::nullopt;
    return wasm::valtype_from_byte(b);
  }

  // Register holding the value of slot s for a read-only use; constants go
  // through the scratch register.
  Reg value_reg(uint32_t s) {
    const AbstractValue& v = st_.slot(s);
    if (v.reg != kNoReg) return v.reg;
    if (v.has_konst) {
      Reg r = scratch_reg(v.type);
      emit(mov_ri(r, v.konst));
      return r;
    }
    return materialize(s);
  }

  // ---- locals ----

  void do_local_get(uint32_t idx) {
    AbstractValue lv = st_.slot(idx);
    if (lv.has_konst) {
      uint32_t s = st_.push(lv.type);
      st_.slot(s).has_konst = true;
      st_.slot(s).konst = lv.konst;
      on_write(s);
      return;
    }
    if (cfg_.multi_reg) {
      Reg r = materialize(idx);
      uint32_t s = st_.push(lv.type);
      st_.bind(s, r);
      on_write(s);
      return;
    }
    Reg r = alloc(lv.type, lv.reg != kNoReg ? reg_bit(lv.reg) : 0);
    if (st_.slot(idx).reg != kNoReg)
      emit(mov_rr(r, st_.slot(idx).reg));
    else
      emit(load_slot(r, idx));
    push_reg(lv.type, r);
  }

  void do_local_set(uint32_t idx, bool tee) {
    uint32_t s = st_.height() - 1;
    AbstractValue v = st_.slot(s);
    AbstractValue& lv = st_.slot(idx);
    ValType t = lv.type;
    st_.unbind(idx);
    lv.stored = false;
    lv.has_konst = false;
    if (v.has_konst) {
      lv.has_konst = true;
      lv.konst = v.konst;
      if (!tee) st_.pop();
      on_write(idx);
      return;
    }
    if (v.reg == kNoReg) {
      Reg r = alloc(t);
      emit(load_slot(r, s));
      st_.bind(s, r);
      v.reg = r;
    }
    if (!tee) {
      st_.pop();
      st_.bind(idx, v.reg);
    } else if (cfg_.multi_reg) {
      st_.bind(idx, v.reg);
    } else {
      Reg r = alloc(t, reg_bit(v.reg));
      emit(mov_rr(r, v.reg));
      st_.bind(idx, r);
    }
    on_write(idx);
  }

  // ---- arithmetic ----

  bool imm_ok(bool wide, uint64_t k, int64_t& imm) const {
    if (!cfg_.isel_imm) return false;
    auto v = alu_imm(wide, k);
    if (!v) return false;
    imm = *v;
    return true;
  }

  void do_int_binop(wasm::IntOp op, ValType t) {
    using wasm::IntOp;
    bool wide = wide_type(t);
    uint32_t pb = st_.height() - 1, pa = pb - 1;
    AbstractValue A = st_.slot(pa), B = st_.slot(pb);
    if (cfg_.fold_consts) {
      if (A.has_konst && B.has_konst) {
        auto r = wasm::eval_int(op, wide, A.konst, B.konst);
        if (r.trap == TrapKind::None) {
          st_.pop();
          st_.pop();
          push_konst(t, r.bits);
          return;
        }
      }
      if (B.has_konst) {
        uint64_t k = B.konst;
        uint64_t bits = wide ? 63 : 31;
        bool zero = k == 0;
        bool one = k == 1;
        bool ones = k == all_ones(wide);
        switch (op) {
          case IntOp::Add:
          case IntOp::Sub:
          case IntOp::Or:
          case IntOp::Xor:
            if (zero) return keep_operand(true);
            break;
          case IntOp::Shl:
          case IntOp::ShrS:
          case IntOp::ShrU:
            if ((k & bits) == 0) return keep_operand(true);
            break;
          case IntOp::Mul:
            if (one) return keep_operand(true);
            if (zero) return replace_with_konst(t, 0);
            break;
          case IntOp::DivS:
          case IntOp::DivU:
            if (one) return keep_operand(true);
            break;
          case IntOp::RemU:
            if (one) return replace_with_konst(t, 0);
            break;
          case IntOp::RemS:
            if (one || ones) return replace_with_konst(t, 0);
            break;
          case IntOp::And:
            if (ones) return keep_operand(true);
            if (zero) return replace_with_konst(t, 0);
            break;
        }
      } else if (A.has_konst && wasm::is_commutative(op)) {
        uint64_t k = A.konst;
        bool zero = k == 0;
        switch (op) {
          case IntOp::Add:
          case IntOp::Or:
          case IntOp::Xor:
            if (zero) return keep_operand(false);
            break;
          case IntOp::Mul:
            if (k == 1) return keep_operand(false);
            if (zero) return replace_with_konst(t, 0);
            break;
          case IntOp::And:
            if (k == all_ones(wide)) return keep_operand(false);
            if (zero) return replace_with_konst(t, 0);
            break;
          default: break;
        }
      }
    }

    int64_t imm = 0;
    bool use_imm = false, swapped = false;
    if (B.has_konst && imm_ok(wide, B.konst, imm)) {
      use_imm = true;
    } else if (A.has_konst && wasm::is_commutative(op) && imm_ok(wide, A.konst, imm)) {
      use_imm = swapped = true;
    }
    bool traps = wasm::can_trap(op);
    if (traps && use_imm && !swapped) {
      uint64_t k = B.konst;
      traps = k == 0 || (op == IntOp::DivS && k == all_ones(wide));
    }

    Reg ra = kNoReg, rb = kNoReg;
    if (use_imm) {
      ra = materialize(swapped ? pb : pa);
    } else {
      ra = materialize(pa);
      rb = materialize(pb, reg_bit(ra));
    }
    RegMask lock = reg_bit(ra) | (rb != kNoReg ? reg_bit(rb) : 0);
    Reg dst = alloc(t, lock);
    Label stub = traps ? trap_stub(2) : visa::kNoLabel;
    Instr i = mk(use_imm ? VOp::AluImm : VOp::Alu);
    i.sub = static_cast<uint8_t>(op);
    i.wide = wide;
    i.a = dst;
    i.b = ra;
    i.c = rb;
    i.imm = imm;
    i.trap_target = stub;
    st_.pop();
    st_.pop();
    emit(i);
    push_reg(t, dst);
  }

  void replace_with_konst(ValType t, uint64_t k) {
    st_.pop();
    st_.pop();
    push_konst(t, k);
  }

  void do_compare(Cond cond, ValType t, bool unary) {
    bool wide = wide_type(t);
    bool fl = wasm::is_float(t);
    uint32_t pb = st_.height() - 1;
    uint32_t pa = unary ? pb : pb - 1;
    AbstractValue A = st_.slot(pa), B = st_.slot(pb);
    if (cfg_.fold_consts) {
      if (unary && A.has_konst) {
        st_.pop();
        push_konst(ValType::I32, wasm::normalize(t, A.konst) == 0 ? 1 : 0);
        return;
      }
      if (!unary && A.has_konst && B.has_konst) {
        bool r = wasm::eval_cond(cond, wide, A.konst, B.konst);
        st_.pop();
        st_.pop();
        push_konst(ValType::I32, r ? 1 : 0);
        return;
      }
    }
    CondDesc d;
    d.cond = cond;
    d.wide = wide;
    int64_t imm = 0;
    if (unary) {
      d.op = VOp::BrCCImm;
      d.b = materialize(pa);
      d.imm = 0;
    } else if (!fl && B.has_konst && imm_ok(wide, B.konst, imm)) {
      d.op = VOp::BrCCImm;
      d.b = materialize(pa);
      d.imm = imm;
    } else if (!fl && A.has_konst && imm_ok(wide, A.konst, imm)) {
      d.op = VOp::BrCCImm;
      d.cond = wasm::swap_operands(cond);
      d.b = materialize(pb);
      d.imm = imm;
    } else {
      d.op = VOp::BrCC;
      d.b = materialize(pa);
      d.c = materialize(pb, reg_bit(d.b));
    }
    RegMask lock = reg_bit(d.b) | (d.c != kNoReg ? reg_bit(d.c) : 0);
    Reg dst = alloc(ValType::I32, lock);
    st_.pop();
    if (!unary) st_.pop();
    Instr cmp = mk(d.op == VOp::BrCC ? VOp::Cmp : VOp::CmpImm);
    cmp.b = d.b;
    cmp.c = d.c;
    cmp.imm = d.imm;
    cmp.wide = d.wide;
    emit(cmp);
    Instr set = mk(VOp::SetCC);
    set.a = dst;
    set.sub = static_cast<uint8_t>(d.cond);
    emit(set);
    uint32_t s = st_.push(ValType::I32);
    st_.bind(s, dst);
    pending_.valid = true;
    pending_.end = buf_.size();
    pending_.slot = s;
    pending_.desc = d;
    on_write(s);
  }

  void do_float_binop(wasm::FloatOp op, ValType t) {
    bool wide = wide_type(t);
    uint32_t pb = st_.height() - 1, pa = pb - 1;
    const AbstractValue &A = st_.slot(pa), &B = st_.slot(pb);
    if (cfg_.fold_consts && A.has_konst && B.has_konst) {
      uint64_t r = wasm::eval_float(op, wide, A.konst, B.konst);
      replace_with_konst(t, r);
      return;
    }
    Reg ra = materialize(pa);
    Reg rb = materialize(pb, reg_bit(ra));
    Reg dst = alloc(t, reg_bit(ra) | reg_bit(rb));
    st_.pop();
    st_.pop();
    Instr i = mk(VOp::FAlu);
    i.sub = static_cast<uint8_t>(op);
    i.wide = wide;
    i.a = dst;
    i.b = ra;
    i.c = rb;
    emit(i);
    push_reg(t, dst);
  }

  void do_float_unop(wasm::FloatUnOp op, ValType t) {
    bool wide = wide_type(t);
    uint32_t pa = st_.height() - 1;
    const AbstractValue& A = st_.slot(pa);
    if (cfg_.fold_consts && A.has_konst) {
      uint64_t r = wasm::eval_float_unary(op, wide, A.konst);
      st_.pop();
      push_konst(t, r);
      return;
    }
    Reg ra = materialize(pa);
    Reg dst = alloc(t, reg_bit(ra));
    st_.pop();
    Instr i = mk(VOp::FUnary);
    i.sub = static_cast<uint8_t>(op);
    i.wide = wide;
    i.a = dst;
    i.b = ra;
    emit(i);
    push_reg(t, dst);
  }

  void do_conversion(const wasm::ConversionInfo& ci) {
    uint32_t pa = st_.height() - 1;
    const AbstractValue& A = st_.slot(pa);
    if (cfg_.fold_consts && A.has_konst) {
      auto r = wasm::eval_conversion(ci.conv, A.konst);
      if (r.trap == TrapKind::None) {
        st_.pop();
        push_konst(ci.to, r.bits);
        return;
      }
    }
    Reg ra = materialize(pa);
    Reg dst = alloc(ci.to, reg_bit(ra));
    Label stub = ci.conv == wasm::Conversion::I32TruncF64S ? trap_stub(1) : visa::kNoLabel;
    st_.pop();
    Instr i = mk(VOp::Cvt);
    i.sub = static_cast<uint8_t>(ci.conv);
    i.a = dst;
    i.b = ra;
    i.trap_target = stub;
    emit(i);
    push_reg(ci.to, dst);
  }

  // ---- memory ----

  void do_load(const wasm::MemAccessInfo& mi, uint32_t offset) {
    uint32_t pa = st_.height() - 1;
    const AbstractValue& A = st_.slot(pa);
    Instr i = mk(VOp::MemLoad);
    i.sub = static_cast<uint8_t>(mi.kind);
    RegMask lock = 0;
    if (cfg_.isel_imm && A.has_konst) {
      i.op = VOp::MemLoadAbs;
      i.imm = static_cast<int64_t>(static_cast<uint64_t>(static_cast<uint32_t>(A.konst)) + offset);
    } else {
      i.b = materialize(pa);
      i.imm = offset;
      lock = reg_bit(i.b);
    }
    i.a = alloc(mi.type, lock);
    i.trap_target = trap_stub(1);
    st_.pop();
    emit(i);
    push_reg(mi.type, i.a);
  }

  void do_store(const wasm::MemAccessInfo& mi, uint32_t offset) {
    uint32_t pv = st_.height() - 1, pa = pv - 1;
    Instr i = mk(VOp::MemStore);
    i.sub = static_cast<uint8_t>(mi.kind);
    const AbstractValue& V = st_.slot(pv);
    bool konst_val = V.has_konst;
    uint64_t kval = V.konst;
    Reg rv = konst_val ? kNoReg : materialize(pv);
    const AbstractValue& A = st_.slot(pa);
    if (cfg_.isel_imm && A.has_konst) {
      i.op = VOp::MemStoreAbs;
      i.imm = static_cast<int64_t>(static_cast<uint64_t>(static_cast<uint32_t>(A.konst)) + offset);
    } else {
      i.b = materialize(pa, rv != kNoReg ? reg_bit(rv) : 0);
      i.imm = offset;
    }
    i.trap_target = trap_stub(2);
    if (konst_val) {
      rv = scratch_reg(mi.type);
      emit(mov_ri(rv, kval));
    }
    i.a = rv;
    st_.pop();
    st_.pop();
    emit(i);
  }

  // ---- select ----

  void do_select() {
    uint32_t pc = st_.height() - 1, pb = pc - 1, pa = pb - 1;
    ValType t = st_.slot(pa).type;
    const AbstractValue& C = st_.slot(pc);
    if (cfg_.fold_consts && C.has_konst) {
      bool take_a = C.konst != 0;
      st_.pop();
      keep_operand(take_a);
      return;
    }
    Reg rc = materialize(pc);
    RegMask lock = reg_bit(rc);
    if (st_.slot(pb).reg != kNoReg) lock |= reg_bit(st_.slot(pb).reg);
    Reg dst = alloc(t, lock);
    load_into(dst, pa);
    Label done = buf_.new_label();
    Instr br = mk(VOp::BrCCImm);
    br.sub = static_cast<uint8_t>(Cond::Ne);
    br.b = rc;
    br.imm = 0;
    br.target = done;
    emit(br);
    load_into(dst, pb);
    buf_.bind(done);
    st_.pop();
    st_.pop();
    st_.pop();
    push_reg(t, dst);
  }

  void load_into(Reg dst, uint32_t s) {
    const AbstractValue& v = st_.slot(s);
    if (v.reg == dst) return;
    if (v.reg != kNoReg)
      emit(mov_rr(dst, v.reg));
    else if (v.has_konst)
      emit(mov_ri(dst, v.konst));
    else
      emit(load_slot(dst, s));
  }

  // ---- calls ----

  void do_call(uint32_t callee) {
    const wasm::FuncType& ft = m_.func_type(callee);
    uint32_t h = st_.height();
    uint32_t nargs = static_cast<uint32_t>(ft.params.size());
    uint32_t argbase = h - nargs;
    bool host = m_.is_import(callee);
    std::vector<Instr> code;
    for (uint32_t j = 0; j < h; j++) {
      AbstractValue& v = st_.slot(j);
      if (!v.stored) {
        store_value(code, j, j);
        v.stored = true;
      }
    }
    bool tag_args = !host && walker_reads_local_tags(cfg_.tagging);
    for (uint32_t j = 0; j < h; j++) tag_for_observation(code, j, true, j < argbase ? reads_tag(j) : tag_args);
    emit_all(code);
    Instr i = mk(host ? VOp::HostCall : VOp::Call);
    i.aux = callee;
    i.slot = argbase;
    i.imm = static_cast<int64_t>(c_.pos() - f_.body_offset);
    emit(i);
    for (uint32_t k = 0; k < nargs; k++) st_.pop();
    st_.unbind_all();
    // A frame entering compiled code here carries the interpreter's tags.
    for (uint32_t j = st_.height(); j < st_.capacity(); j++) st_.set_tag_mem(j, Tag::Untagged);
    if (ft.result) push_reg(*ft.result, ret_reg(*ft.result));
  }

  // ---- returns ----

  static bool pure_dst(VOp op) {
    switch (op) {
      case VOp::MovRR:
      case VOp::MovRI:
      case VOp::LoadSlot:
      case VOp::Alu:
      case VOp::AluImm:
      case VOp::FAlu:
      case VOp::FUnary:
      case VOp::Cvt:
      case VOp::SetCC:
      case VOp::MemLoad:
      case VOp::MemLoadAbs:
      case VOp::GlobalLoad:
      case VOp::MemSize:
      case VOp::MemGrow: return true;
      default: return false;
    }
  }

  void plan_return(std::vector<Instr>& out) {
    auto res = m_.func_type(out_.func).result;
    if (res) {
      uint32_t s = st_.height() - 1;
      const AbstractValue& v = st_.slot(s);
      Reg r = ret_reg(*res);
      if (v.reg == r) {
      } else if (v.reg != kNoReg) {
        out.push_back(mov_rr(r, v.reg));
      } else if (v.has_konst) {
        out.push_back(mov_ri(r, v.konst));
      } else {
        out.push_back(load_slot(r, s));
      }
    }
    out.push_back(mk(VOp::Ret));
  }

  void emit_return() {
    auto res = m_.func_type(out_.func).result;
    if (res) {
      uint32_t s = st_.height() - 1;
      const AbstractValue& v = st_.slot(s);
      Reg r = ret_reg(*res);
      if (v.reg != kNoReg && v.reg != r && st_.holders(v.reg).size() == 1 && buf_.retractable() > 0) {
        Instr& last = buf_.at(buf_.size() - 1);
        if (pure_dst(last.op) && last.a == v.reg && last.trap_target == visa::kNoLabel) {
          last.a = r;
          emit(mk(VOp::Ret));
          return;
        }
      }
    }
    std::vector<Instr> code;
    plan_return(code);
    emit_all(code);
  }

  // ---- merges ----

  View view_for(const Control& t) const {
    View v;
    v.h = t.height;
    v.arity = t.arity();
    v.top = st_.height() - 1;
    return v;
  }

  StateSnapshot first_arrival(const View& v) {
    StateSnapshot M;
    M.height = v.size();
    M.slots.resize(M.height);
    M.tags.assign(M.height, Tag::Untagged);
    RegMask claimed = 0;
    std::vector<bool> done(M.height, false);
    for (uint32_t j = 0; j < M.height; j++) {
      uint32_t s = v.src(j);
      const AbstractValue& a = st_.slot(s);
      AbstractValue& mv = M.slots[j];
      mv = AbstractValue{};
      mv.type = a.type;
      bool own = a.stored && s == j;
      if (a.has_konst) {
        mv.has_konst = true;
        mv.konst = a.konst;
        mv.stored = own;
        done[j] = true;
      } else if (a.reg != kNoReg && !(claimed & reg_bit(a.reg))) {
        mv.reg = a.reg;
        mv.stored = own;
        claimed |= reg_bit(a.reg);
        done[j] = true;
      } else if (own) {
        mv.stored = true;
        done[j] = true;
      }
      Tag want = wasm::tag_of(a.type);
      if (eager_tag(j))
        M.tags[j] = want;
      else if (tracked_tag(j) && st_.tag_mem(j) == want)
        M.tags[j] = want;
    }
    for (uint32_t j = 0; j < M.height; j++) {
      if (done[j]) continue;
      AbstractValue& mv = M.slots[j];
      bool fl = wasm::is_float(mv.type);
      Reg first = fl ? visa::kX0 : visa::kR0;
      Reg last = static_cast<Reg>(first + (fl ? visa::kNumFloatRegs : visa::kNumIntRegs));
      Reg pick = kNoReg;
      for (Reg r = first; r < last && pick == kNoReg; r++)
        if (!(claimed & reg_bit(r)) && st_.reg_free(r)) pick = r;
      for (Reg r = first; r < last && pick == kNoReg; r++)
        if (!(claimed & reg_bit(r))) pick = r;
      if (pick != kNoReg) {
        mv.reg = pick;
        claimed |= reg_bit(pick);
      } else {
        mv.stored = true;
      }
    }
    return M;
  }

  Reg free_merge_reg(ValType t, RegMask claimed) const {
    bool fl = wasm::is_float(t);
    Reg first = fl ? visa::kX0 : visa::kR0;
    Reg last = static_cast<Reg>(first + (fl ? visa::kNumFloatRegs : visa::kNumIntRegs));
    for (Reg r = first; r < last; r++)
      if (!(claimed & reg_bit(r))) return r;
    return kNoReg;
  }

  // Weakens M so the current state can conform; returns slots that lost
  // their constant.
  FixList weaken(StateSnapshot& M, const View& v) {
    FixList fixes;
    RegMask claimed = 0;
    for (const auto& mv : M.slots)
      if (mv.reg != kNoReg) claimed |= reg_bit(mv.reg);
    for (uint32_t j = 0; j < M.height; j++) {
      uint32_t s = v.src(j);
      const AbstractValue& a = st_.slot(s);
      AbstractValue& mv = M.slots[j];
      bool own = a.stored && s == j;
      if (mv.has_konst) {
        if (a.has_konst && a.konst == mv.konst) {
          if (mv.stored && !own) mv.stored = false;
        } else {
          Reg pick = is_local(j) ? kNoReg : free_merge_reg(mv.type, claimed);
          AbstractValue fix = mv;
          fix.reg = pick;
          fixes.emplace_back(j, fix);
          mv.has_konst = false;
          if (pick != kNoReg) {
            mv.reg = pick;
            mv.stored = false;
            claimed |= reg_bit(pick);
          } else {
            mv.stored = true;
          }
        }
      } else if (mv.reg != kNoReg) {
        if (mv.stored && !own) mv.stored = false;
      }
      if (M.tags[j] != Tag::Untagged && !eager_tag(j) && st_.tag_mem(j) != M.tags[j]) M.tags[j] = Tag::Untagged;
    }
    return fixes;
  }

  // Code transforming the current state into M for the positions of v.
  void plan_edge(const View& v, const StateSnapshot& M, bool conforming, std::vector<Instr>& out) {
    for (uint32_t j = 0; j < M.height; j++) {
      const AbstractValue& mv = M.slots[j];
      if (!mv.stored) continue;
      uint32_t s = v.src(j);
      const AbstractValue& a = st_.slot(s);
      if (a.stored && s == j) continue;
      if (mv.has_konst && a.has_konst && a.konst == mv.konst) continue;
      store_value(out, s, j);
    }
    for (uint32_t j = 0; j < M.height; j++)
      if (M.tags[j] != Tag::Untagged && st_.tag_mem(j) != M.tags[j]) out.push_back(store_tag(j, M.slots[j].type));

    struct Move {
      Reg dst, src;
    };
    std::vector<Move> moves;
    std::vector<Instr> fills;
    for (uint32_t j = 0; j < M.height; j++) {
      const AbstractValue& mv = M.slots[j];
      if (mv.reg == kNoReg) continue;
      uint32_t s = v.src(j);
      const AbstractValue& a = st_.slot(s);
      if (a.reg == mv.reg) continue;
      if (a.reg != kNoReg)
        moves.push_back({mv.reg, a.reg});
      else if (a.has_konst)
        fills.push_back(mov_ri(mv.reg, a.konst));
      else
        fills.push_back(load_slot(mv.reg, s));
    }
    if (conforming && cfg_.fault_broken_merge) {
      if (!moves.empty())
        moves.erase(moves.begin());
      else if (!fills.empty())
        fills.erase(fills.begin());
    }
    while (!moves.empty()) {
      bool progress = false;
      for (size_t k = 0; k < moves.size(); k++) {
        Reg d = moves[k].dst;
        bool is_src = std::any_of(moves.begin(), moves.end(), [&](const Move& m) { return m.src == d; });
        if (is_src) continue;
        out.push_back(mov_rr(d, moves[k].src));
        moves.erase(moves.begin() + static_cast<long>(k));
        progress = true;
        break;
      }
      if (progress) continue;
      Reg d = moves[0].dst;
      Reg tmp = visa::is_float_reg(d) ? visa::kXT : visa::kRT;
      out.push_back(mov_rr(tmp, d));
      for (Move& m : moves)
        if (m.src == d) m.src = tmp;
    }
    for (const Instr& i : fills) out.push_back(i);
  }

  // Records an arrival of the current state at t and returns the label to
  // jump to after executing `code`.
  Label arrive(Control& t, std::vector<Instr>& code) {
    View v = view_for(t);
    if (t.kind == Control::Kind::Loop) {
      plan_edge(v, t.loop_state, true, code);
      return t.loop_label;
    }
    if (!t.has_merge) {
      t.merge = first_arrival(v);
      t.has_merge = true;
      t.label = buf_.new_label();
      snapshot_taken();
      plan_edge(v, t.merge, false, code);
      return t.label;
    }
    FixList fixes = weaken(t.merge, v);
    if (!fixes.empty()) {
      t.groups.push_back(t.label);
      t.fixes.push_back(std::move(fixes));
      t.label = buf_.new_label();
    }
    plan_edge(v, t.merge, true, code);
    return t.label;
  }

  Instr jmp(Label l) {
    Instr i = mk(VOp::Jmp);
    i.target = l;
    return i;
  }

  // ---- control ----

  Control& label_at(uint32_t depth) { return ctrl_[ctrl_.size() - 1 - depth]; }

  void do_block(Control::Kind kind, std::optional<ValType> bt) {
    Control c;
    c.kind = kind;
    c.result = bt;
    c.height = st_.height();
    c.wasm_pc = pc_;
    ctrl_.push_back(std::move(c));
  }

  void do_loop(std::optional<ValType> bt) {
    uint32_t h = st_.height();
    std::vector<Instr> code;
    for (uint32_t j = 0; j < h; j++) {
      AbstractValue& v = st_.slot(j);
      if (!v.stored) {
        store_value(code, j, j);
        v.stored = true;
      }
    }
    for (uint32_t j = 0; j < h; j++) tag_for_observation(code, j, true, tracked_tag(j));
    emit_all(code);
    st_.unbind_all();
    for (uint32_t j = 0; j < h; j++) {
      st_.slot(j).has_konst = false;
      st_.slot(j).konst = 0;
    }
    Control c;
    c.kind = Control::Kind::Loop;
    c.result = bt;
    c.height = h;
    c.wasm_pc = pc_;
    c.loop_state = st_.snapshot();
    for (uint32_t j = 0; j < h; j++) {
      Tag want = wasm::tag_of(st_.slot(j).type);
      if (!tracked_tag(j) || c.loop_state.tags[j] != want) c.loop_state.tags[j] = Tag::Untagged;
    }
    c.loop_label = buf_.new_label();
    buf_.bind(c.loop_label);
    out_.loops.push_back(LoopHeader{pc_, buf_.size(), h});
    snapshot_taken();
    pending_.valid = false;
    ctrl_.push_back(std::move(c));
  }

  // Pops the i32 condition and describes the branch taken when it is true.
  CondDesc take_condition() {
    uint32_t s = st_.height() - 1;
    const AbstractValue& v = st_.slot(s);
    CondDesc d;
    if (cfg_.fold_consts && v.has_konst) {
      d.is_konst = true;
      d.value = v.konst != 0;
      st_.pop();
      return d;
    }
    if (pending_.valid && pending_.slot == s && pending_.end == buf_.size() && buf_.retractable() >= 2 &&
        v.reg != kNoReg && st_.holders(v.reg).size() == 1) {
      d = pending_.desc;
      st_.pop();
      buf_.pop_back();
      buf_.pop_back();
      pending_.valid = false;
      return d;
    }
    Reg r = materialize(s);
    st_.pop();
    d.op = VOp::BrCCImm;
    d.cond = Cond::Ne;
    d.b = r;
    d.imm = 0;
    return d;
  }

  Instr branch(const CondDesc& d, Cond cond, Label l) {
    Instr i = mk(d.op);
    i.sub = static_cast<uint8_t>(cond);
    i.b = d.b;
    i.c = d.c;
    i.imm = d.imm;
    i.wide = d.wide;
    i.target = l;
    return i;
  }

  // Emits: if !cond goto skip (or the equivalent when cond cannot be negated).
  Label branch_unless(const CondDesc& d) {
    Label skip = buf_.new_label();
    if (auto neg = wasm::negate(d.cond)) {
      emit(branch(d, *neg, skip));
    } else {
      Label take = buf_.new_label();
      emit(branch(d, d.cond, take));
      emit(jmp(skip));
      buf_.bind(take);
    }
    return skip;
  }

  void do_br(uint32_t depth) {
    Control& t = label_at(depth);
    if (t.kind == Control::Kind::Func) {
      emit_return();
    } else {
      std::vector<Instr> code;
      Label l = arrive(t, code);
      emit_all(code);
      emit(jmp(l));
    }
    reachable_ = false;
  }

  void do_br_if(uint32_t depth) {
    CondDesc d = take_condition();
    if (d.is_konst) {
      if (d.value) do_br(depth);
      return;
    }
    Control& t = label_at(depth);
    std::vector<Instr> code;
    Label target = visa::kNoLabel;
    if (t.kind == Control::Kind::Func)
      plan_return(code);
    else
      target = arrive(t, code);
    if (code.empty()) {
      emit(branch(d, d.cond, target));
      return;
    }
    Label skip = branch_unless(d);
    emit_all(code);
    if (target != visa::kNoLabel) emit(jmp(target));
    buf_.bind(skip);
  }

  void do_br_table() {
    uint32_t n = c_.u32_leb();
    std::vector<uint32_t> depths(n + 1);
    for (uint32_t k = 0; k <= n; k++) depths[k] = c_.u32_leb();
    uint32_t s = st_.height() - 1;
    const AbstractValue& v = st_.slot(s);
    if (cfg_.fold_consts && v.has_konst) {
      uint64_t idx = std::min<uint64_t>(static_cast<uint32_t>(v.konst), n);
      st_.pop();
      do_br(depths[idx]);
      return;
    }
    Reg ri = materialize(s);
    st_.pop();
    struct Edge {
      uint32_t depth;
      Label entry;
      std::vector<Instr> code;
      Label target;
    };
    std::vector<Edge> edges;
    std::vector<Label> table(n + 1);
    for (uint32_t k = 0; k <= n; k++) {
      auto it = std::find_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.depth == depths[k]; });
      if (it == edges.end()) {
        Edge e;
        e.depth = depths[k];
        Control& t = label_at(e.depth);
        e.target = visa::kNoLabel;
        if (t.kind == Control::Kind::Func)
          plan_return(e.code);
        else
          e.target = arrive(t, e.code);
        e.entry = e.code.empty() ? e.target : buf_.new_label();
        edges.push_back(std::move(e));
        it = edges.end() - 1;
      }
      table[k] = it->entry;
    }
    Instr i = mk(VOp::BrTable);
    i.b = ri;
    i.aux = buf_.add_table(std::move(table));
    emit(i);
    for (Edge& e : edges) {
      if (e.code.empty()) continue;
      buf_.bind(e.entry);
      emit_all(e.code);
      if (e.target != visa::kNoLabel) emit(jmp(e.target));
    }
    reachable_ = false;
  }

  void do_if(std::optional<ValType> bt) {
    CondDesc d = take_condition();
    Control c;
    c.kind = Control::Kind::If;
    c.result = bt;
    c.height = st_.height();
    c.wasm_pc = pc_;
    if (d.is_konst) {
      if (!d.value) {
        c.else_state = st_.snapshot();
        c.else_reachable = true;
        snapshot_taken();
        reachable_ = false;
      }
    } else {
      c.else_label = branch_unless(d);
      c.else_state = st_.snapshot();
      c.else_reachable = true;
      snapshot_taken();
    }
    ctrl_.push_back(std::move(c));
  }

  void do_else() {
    Control& c = ctrl_.back();
    if (reachable_) {
      if (!c.else_reachable) {
        c.parked_state = st_.snapshot();
        c.parked = true;
        snapshot_taken();
      } else {
        std::vector<Instr> code;
        Label l = arrive(c, code);
        emit_all(code);
        emit(jmp(l));
      }
    }
    enter_else(c);
  }

  void enter_else(Control& c) {
    c.in_else = true;
    pending_.valid = false;
    if (c.else_reachable) {
      if (c.else_label != visa::kNoLabel) buf_.bind(c.else_label);
      st_.restore(c.else_state);
      c.else_state = StateSnapshot{};
      c.else_reachable = false;
      snapshot_dropped();
      reachable_ = true;
    } else {
      reachable_ = false;
    }
  }

  void do_end() {
    Control& c = ctrl_.back();
    pending_.valid = false;
    if (c.kind == Control::Kind::Func) {
      if (reachable_) emit_return();
      reachable_ = false;
      ctrl_.pop_back();
      return;
    }
    if (c.kind == Control::Kind::Loop) {
      snapshot_dropped();
      ctrl_.pop_back();
      return;
    }
    if (c.kind == Control::Kind::If && !c.in_else) {
      if (reachable_ && c.else_reachable) {
        // Both arms fall through: the implicit else needs a jump over it only
        // if its edge code is non-empty.
        std::vector<Instr> then_code;
        Label then_target = arrive(c, then_code);
        emit_all(then_code);
        StateSnapshot then_state = st_.snapshot();
        st_.restore(c.else_state);
        std::vector<Instr> else_code;
        Label else_target = arrive(c, else_code);
        bool closed = then_target != else_target;
        // Constant fix-ups sit between here and the merge label.
        bool over_fixes = !c.groups.empty();
        if (!else_code.empty() || closed || over_fixes) {
          st_.restore(then_state);
          emit(jmp(then_target));
          buf_.bind(c.else_label);
          st_.restore(c.else_state);
          emit_all(else_code);
          if (over_fixes) emit(jmp(else_target));
        } else {
          buf_.bind(c.else_label);
        }
        c.else_state = StateSnapshot{};
        c.else_reachable = false;
        snapshot_dropped();
        reachable_ = false;
        c.in_else = true;
      } else if (reachable_) {
        c.parked_state = st_.snapshot();
        c.parked = true;
        snapshot_taken();
        enter_else(c);
      } else {
        enter_else(c);
      }
    }
    if (c.parked) {
      if (reachable_) throw std::logic_error("parked if-arm with reachable else");
      st_.restore(c.parked_state);
      c.parked = false;
      snapshot_dropped();
      reachable_ = true;
    }
    if (reachable_ && c.has_merge) {
      std::vector<Instr> code;
      arrive(c, code);
      emit_all(code);
      if (!c.groups.empty()) emit(jmp(c.label));
    }
    if (c.has_merge) {
      for (size_t k = 0; k < c.groups.size(); k++) {
        buf_.bind(c.groups[k]);
        std::vector<Instr> code;
        for (const auto& [j, mv] : c.fixes[k]) {
          if (mv.reg != kNoReg)
            code.push_back(mov_ri(mv.reg, mv.konst));
          else
            store_konst(code, j, mv.type, mv.konst);
        }
        emit_all(code);
      }
      buf_.bind(c.label);
      st_.restore(c.merge);
      snapshot_dropped();
      reachable_ = true;
    }
    ctrl_.pop_back();
  }
};

}  // namespace

CompiledFunction compile_function(const wasm::WasmModule& module, uint32_t func, const CompilerConfig& config,
                                  wasm::ReadTracker* tracker) {
  auto t0 = std::chrono::steady_clock::now();
  FunctionCompiler fc(module, func, config, tracker);
  CompiledFunction out = fc.run();
  auto t1 = std::chrono::steady_clock::now();
  out.metrics.compile_ns = static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
  return out;
}

}  // namespace spc::compiler
