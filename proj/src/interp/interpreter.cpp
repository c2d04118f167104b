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

#include "spc/interp/interpreter.h"

#include <algorithm>
#include <array>
#include <cstring>

#include "spc/wasm/opcodes.h"

namespace spc::interp {

using runtime::Activation;
using runtime::ExecState;
using runtime::Exit;
using runtime::FrameKind;
using runtime::Pause;
using wasm::Opcode;
using wasm::Tag;
using wasm::TrapKind;
using wasm::ValType;

namespace {

struct OpClass {
  enum Kind : uint8_t { Other, IntBin, Compare, FloatBin, FloatUn, Convert, Load, Store } kind = Other;
  uint8_t sub = 0;
  bool wide = false;
  bool unary = false;
  uint8_t width = 0;
  ValType type = ValType::I32;
};

std::array<OpClass, 256> build_classes() {
  std::array<OpClass, 256> t{};
  for (unsigned b = 0; b < 256; b++) {
    auto op = wasm::opcode_from_byte(static_cast<uint8_t>(b));
    if (!op) continue;
    OpClass& c = t[b];
    if (auto i = wasm::binary_int_info(*op)) {
      c = {OpClass::IntBin, static_cast<uint8_t>(i->op), !wasm::is_narrow(i->type), false, 0, i->type};
    } else if (auto i = wasm::compare_info(*op)) {
      c = {OpClass::Compare, static_cast<uint8_t>(i->cond), !wasm::is_narrow(i->operand), i->unary, 0, i->operand};
    } else if (auto i = wasm::binary_float_info(*op)) {
      c = {OpClass::FloatBin, static_cast<uint8_t>(i->op), !wasm::is_narrow(i->type), false, 0, i->type};
    } else if (auto i = wasm::unary_float_info(*op)) {
      c = {OpClass::FloatUn, static_cast<uint8_t>(i->op), !wasm::is_narrow(i->type), true, 0, i->type};
    } else if (auto i = wasm::conversion_info(*op)) {
      c = {OpClass::Convert, static_cast<uint8_t>(i->conv), false, true, 0, i->to};
    } else if (auto i = wasm::mem_access_info(*op)) {
      c = {i->store ? OpClass::Store : OpClass::Load, static_cast<uint8_t>(i->kind), false, false,
           static_cast<uint8_t>(i->width), i->type};
    }
  }
  return t;
}

const std::array<OpClass, 256> kClasses = build_classes();

uint32_t leb_u32(const uint8_t* p, uint32_t& pc) {
  uint32_t r = 0;
  unsigned shift = 0;
  uint8_t b;
  do {
    b = p[pc++];
    r |= static_cast<uint32_t>(b & 0x7f) << shift;
    shift += 7;
  } while (b & 0x80);
  return r;
}

int64_t leb_s64(const uint8_t* p, uint32_t& pc) {
  uint64_t r = 0;
  unsigned shift = 0;
  uint8_t b;
  do {
    b = p[pc++];
    r |= static_cast<uint64_t>(b & 0x7f) << shift;
    shift += 7;
  } while (b & 0x80);
  if (shift < 64 && (b & 0x40)) r |= ~uint64_t{0} << shift;
  return static_cast<int64_t>(r);
}

}  // namespace

Exit run(ExecState& es, size_t index) {
  Activation& a = es.acts[index];
  const wasm::WasmModule& m = es.module;
  const wasm::WasmFunction& f = m.defined(a.func);
  const wasm::FuncType& sig = m.func_type(a.func);
  const uint8_t* body = m.bytes->data() + f.body_offset;
  const auto& st = f.sidetable;
  const auto& ltypes = f.local_types;
  uint64_t* W = es.stack.words();
  uint8_t* T = es.stack.tags();
  const size_t fp = a.fp;
  uint64_t* V = W + a.vfp();
  uint8_t* G = T + a.vfp();
  uint32_t pc = static_cast<uint32_t>(W[fp + runtime::kMetaIp]);
  uint32_t stp = static_cast<uint32_t>(W[fp + runtime::kMetaStp]);
  uint32_t sp = a.height;
  a.pause = Pause::None;
  auto& probes = es.probes[a.func];
  auto& counters = es.counters;

  auto save = [&] {
    W[fp + runtime::kMetaIp] = pc;
    W[fp + runtime::kMetaStp] = stp;
    a.height = sp;
  };
  auto push = [&](uint64_t v, ValType t) {
    V[sp] = v;
    G[sp] = static_cast<uint8_t>(wasm::tag_of(t));
    sp++;
  };
  auto trap = [&](TrapKind k, uint32_t at) {
    pc = at;
    save();
    a.pause_pc = at;
    Exit e;
    e.kind = Exit::Kind::Trap;
    e.trap = k;
    e.pc = at;
    e.height = sp;
    return e;
  };
  auto ret = [&] {
    Exit e;
    e.kind = Exit::Kind::Return;
    if (sig.result) e.value = V[sp - 1];
    return e;
  };
  // Applies sidetable entry i; true when the branch leaves the function.
  auto take = [&](uint32_t i) {
    const wasm::SidetableEntry& e = st[i];
    if (e.pop_count) {
      uint32_t from = sp - e.val_count, to = from - e.pop_count;
      for (uint32_t k = 0; k < e.val_count; k++) {
        V[to + k] = V[from + k];
        G[to + k] = G[from + k];
      }
      sp -= e.pop_count;
    }
    pc = e.target_pc;
    stp = e.target_stp;
    return pc >= f.body_size;
  };

  while (true) {
    if (!probes.empty()) {
      auto it = probes.find(pc);
      if (it != probes.end()) {
        save();
        a.pause_pc = pc;
        auto fns = it->second;
        for (auto& fn : fns) fn(runtime::FrameView(es, index));
      }
    }
    if (es.opts.audit) {
      save();
      a.pause_pc = pc;
      es.audit_frame(index);
    }
    uint32_t at = pc;
    uint8_t byte = body[pc++];
    if (es.opts.trace)
      *es.opts.trace << a.func << ":" << at << " " << wasm::opcode_name(static_cast<Opcode>(byte)) << " "
                     << (sp - f.num_locals) << "\n";
    counters.bytecodes++;
    if (es.over_budget()) {
      pc = at;
      save();
      Exit e;
      e.kind = Exit::Kind::Limit;
      return e;
    }
    switch (static_cast<Opcode>(byte)) {
      case Opcode::Unreachable: return trap(TrapKind::Unreachable, at);
      case Opcode::Nop: break;
      case Opcode::Block: pc++; break;
      case Opcode::Loop: {
        uint64_t& flags = W[fp + runtime::kMetaFlags];
        flags = runtime::tick_hotness(flags);
        if (es.want_tier_up(a.func, at, runtime::flags_hotness(flags))) {
          pc = at;
          save();
          a.pause = Pause::LoopHeader;
          a.pause_pc = at;
          Exit e;
          e.kind = Exit::Kind::TierSwitch;
          return e;
        }
        pc++;
        break;
      }
      case Opcode::If: {
        pc++;
        uint32_t c = static_cast<uint32_t>(V[--sp]);
        if (c)
          stp++;
        else
          take(stp);
        break;
      }
      case Opcode::Else: take(stp); break;
      case Opcode::End:
        if (pc >= f.body_size) return ret();
        break;
      case Opcode::Br:
        if (take(stp)) return ret();
        break;
      case Opcode::BrIf: {
        leb_u32(body, pc);
        uint32_t c = static_cast<uint32_t>(V[--sp]);
        if (!c) {
          stp++;
          break;
        }
        if (take(stp)) return ret();
        break;
      }
      case Opcode::BrTable: {
        uint32_t n = leb_u32(body, pc);
        uint32_t k = static_cast<uint32_t>(V[--sp]);
        if (k > n) k = n;
        if (take(stp + k)) return ret();
        break;
      }
      case Opcode::Return: return ret();
      case Opcode::Call: {
        uint32_t callee = leb_u32(body, pc);
        uint32_t nargs = static_cast<uint32_t>(m.func_type(callee).params.size());
        sp -= nargs;
        save();
        a.pause = Pause::Call;
        a.pause_pc = at;
        Exit e;
        e.kind = Exit::Kind::Call;
        e.callee = callee;
        e.argbase = sp;
        return e;
      }
      case Opcode::Drop: sp--; break;
      case Opcode::SelectT: {
        uint32_t n = leb_u32(body, pc);
        pc += n;
        [[fallthrough]];
      }
      case Opcode::Select: {
        uint32_t c = static_cast<uint32_t>(V[sp - 1]);
        uint64_t b = V[sp - 2];
        sp -= 2;
        if (!c) V[sp - 1] = b;
        break;
      }
      case Opcode::LocalGet: {
        uint32_t i = leb_u32(body, pc);
        push(V[i], ltypes[i]);
        break;
      }
      case Opcode::LocalSet: {
        uint32_t i = leb_u32(body, pc);
        V[i] = V[--sp];
        G[i] = static_cast<uint8_t>(wasm::tag_of(ltypes[i]));
        break;
      }
      case Opcode::LocalTee: {
        uint32_t i = leb_u32(body, pc);
        V[i] = V[sp - 1];
        G[i] = static_cast<uint8_t>(wasm::tag_of(ltypes[i]));
        break;
      }
      case Opcode::GlobalGet: {
        uint32_t g = leb_u32(body, pc);
        push(es.globals[g], m.globals[g].type);
        break;
      }
      case Opcode::GlobalSet: {
        uint32_t g = leb_u32(body, pc);
        es.globals[g] = V[--sp];
        break;
      }
      case Opcode::MemorySize:
        pc++;
        push(es.pages(), ValType::I32);
        break;
      case Opcode::MemoryGrow: {
        pc++;
        uint32_t d = static_cast<uint32_t>(V[--sp]);
        push(es.grow(d), ValType::I32);
        break;
      }
      case Opcode::I32Const: push(static_cast<uint32_t>(static_cast<int32_t>(leb_s64(body, pc))), ValType::I32); break;
      case Opcode::I64Const: push(static_cast<uint64_t>(leb_s64(body, pc)), ValType::I64); break;
      case Opcode::F32Const: {
        uint32_t v;
        std::memcpy(&v, body + pc, 4);
        pc += 4;
        push(v, ValType::F32);
        break;
      }
      case Opcode::F64Const: {
        uint64_t v;
        std::memcpy(&v, body + pc, 8);
        pc += 8;
        push(v, ValType::F64);
        break;
      }
      case Opcode::RefNull:
        pc++;
        push(wasm::kNullRef, ValType::Ref);
        break;
      case Opcode::RefIsNull:
        V[sp - 1] = V[sp - 1] == wasm::kNullRef ? 1 : 0;
        G[sp - 1] = static_cast<uint8_t>(Tag::I32);
        break;
      default: {
        const OpClass& c = kClasses[byte];
        switch (c.kind) {
          case OpClass::IntBin: {
            auto r = wasm::eval_int(static_cast<wasm::IntOp>(c.sub), c.wide, V[sp - 2], V[sp - 1]);
            sp -= 2;
            if (r.trap != TrapKind::None) return trap(r.trap, at);
            push(wasm::normalize(c.type, r.bits), c.type);
            break;
          }
          case OpClass::Compare: {
            bool r;
            if (c.unary) {
              r = wasm::eval_cond(wasm::Cond::Eq, c.wide, V[sp - 1], 0);
              sp -= 1;
            } else {
              r = wasm::eval_cond(static_cast<wasm::Cond>(c.sub), c.wide, V[sp - 2], V[sp - 1]);
              sp -= 2;
            }
            push(r ? 1 : 0, ValType::I32);
            break;
          }
          case OpClass::FloatBin: {
            uint64_t r = wasm::eval_float(static_cast<wasm::FloatOp>(c.sub), c.wide, V[sp - 2], V[sp - 1]);
            sp -= 2;
            push(r, c.type);
            break;
          }
          case OpClass::FloatUn: {
            uint64_t r = wasm::eval_float_unary(static_cast<wasm::FloatUnOp>(c.sub), c.wide, V[sp - 1]);
            sp -= 1;
            push(r, c.type);
            break;
          }
          case OpClass::Convert: {
            auto r = wasm::eval_conversion(static_cast<wasm::Conversion>(c.sub), V[sp - 1]);
            sp -= 1;
            if (r.trap != TrapKind::None) return trap(r.trap, at);
            push(r.bits, c.type);
            break;
          }
          case OpClass::Load: {
            leb_u32(body, pc);
            uint32_t off = leb_u32(body, pc);
            uint64_t ea = static_cast<uint64_t>(static_cast<uint32_t>(V[--sp])) + off;
            if (ea + c.width > es.memory.size()) return trap(TrapKind::OutOfBounds, at);
            uint64_t v = 0;
            std::memcpy(&v, es.memory.data() + ea, c.width);
            push(v, c.type);
            break;
          }
          case OpClass::Store: {
            leb_u32(body, pc);
            uint32_t off = leb_u32(body, pc);
            uint64_t v = V[sp - 1];
            uint64_t ea = static_cast<uint64_t>(static_cast<uint32_t>(V[sp - 2])) + off;
            sp -= 2;
            if (ea + c.width > es.memory.size()) return trap(TrapKind::OutOfBounds, at);
            std::memcpy(es.memory.data() + ea, &v, c.width);
            break;
          }
          case OpClass::Other: throw std::logic_error("interpreter: unsupported opcode");
        }
      }
    }
  }
}

}  // namespace spc::interp
