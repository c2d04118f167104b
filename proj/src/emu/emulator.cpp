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

#include "spc/emu/emulator.h"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "spc/visa/isa.h"

namespace spc::emu {

using runtime::Activation;
using runtime::ExecState;
using runtime::Exit;
using runtime::Pause;
using visa::Instr;
using visa::VOp;
using wasm::TrapKind;

namespace {

constexpr uint64_t kPoison = 0xdeadbeefdeadbeefull;

uint32_t mem_width(wasm::MemKind k) {
  switch (k) {
    case wasm::MemKind::I32:
    case wasm::MemKind::F32: return 4;
    case wasm::MemKind::I64:
    case wasm::MemKind::F64: return 8;
    case wasm::MemKind::I32_8U: return 1;
  }
  return 8;
}

}  // namespace

Exit run(ExecState& es, size_t index) {
  Activation& a = es.acts[index];
  const compiler::CompiledFunction& cf = es.compiled_for(a.func);
  const std::vector<Instr>& code = cf.code.instrs();
  const auto& tables = cf.code.tables();
  uint64_t* W = es.stack.words();
  uint8_t* T = es.stack.tags();
  const size_t fp = a.fp;
  uint64_t* V = W + a.vfp();
  uint8_t* G = T + a.vfp();
  auto& counters = es.counters;

  uint64_t R[visa::kNumRegs];
  std::fill(std::begin(R), std::end(R), kPoison);
  if (a.has_resume) {
    R[visa::kR0] = a.resume_bits;
    R[visa::kX0] = a.resume_bits;
    a.has_resume = false;
  }
  a.pause = Pause::None;
  uint64_t cmp_a = 0, cmp_b = 0;
  bool cmp_wide = false;
  TrapKind pending = TrapKind::None;
  uint32_t vpc = static_cast<uint32_t>(W[fp + runtime::kMetaIp]);
  bool first = true;

  auto trap_to = [&](const Instr& i, TrapKind k) {
    if (i.trap_target == visa::kNoLabel) throw std::logic_error("emulator: trap without a trap path");
    pending = k;
    vpc = i.trap_target;
  };
  auto in_bounds = [&](uint64_t ea, uint32_t w) { return ea + w <= es.memory.size(); };

  while (true) {
    if (!first && cf.header_at_vpc[vpc] >= 0) {
      uint32_t pc = static_cast<uint32_t>(cf.header_at_vpc[vpc]);
      uint32_t height = 0;
      for (const auto& h : cf.loops)
        if (h.wasm_pc == pc) {
          height = h.height;
          break;
        }
      W[fp + runtime::kMetaIp] = vpc;
      a.height = height;
      a.pause_pc = pc;
      if (es.opts.audit) es.audit_frame(index);
      if (es.want_tier_down(a.func, pc)) {
        a.pause = Pause::LoopHeader;
        Exit e;
        e.kind = Exit::Kind::TierSwitch;
        return e;
      }
    }
    first = false;
    const Instr& i = code[vpc];
    counters.instrs_retired++;
    counters.cost_units += visa::instr_cost(i.op);
    if (es.opts.trace) *es.opts.trace << a.func << ":@" << vpc << " " << visa::disassemble_instr(i, cf.code) << "\n";
    if (es.over_budget()) {
      W[fp + runtime::kMetaIp] = vpc;
      Exit e;
      e.kind = Exit::Kind::Limit;
      return e;
    }
    switch (i.op) {
      case VOp::MovRR: R[i.a] = R[i.b]; break;
      case VOp::MovRI: R[i.a] = static_cast<uint64_t>(i.imm); break;
      case VOp::LoadSlot: R[i.a] = V[i.slot]; break;
      case VOp::StoreSlot:
        V[i.slot] = R[i.a];
        counters.slot_stores++;
        break;
      case VOp::StoreSlotImm:
        V[i.slot] = static_cast<uint64_t>(i.imm);
        counters.slot_stores++;
        break;
      case VOp::StoreTag:
        G[i.slot] = i.sub;
        counters.tag_stores++;
        break;
      case VOp::Alu:
      case VOp::AluImm: {
        uint64_t y = i.op == VOp::Alu ? R[i.c] : static_cast<uint64_t>(i.imm);
        auto r = wasm::eval_int(static_cast<wasm::IntOp>(i.sub), i.wide, R[i.b], y);
        if (r.trap != TrapKind::None) {
          trap_to(i, r.trap);
          continue;
        }
        R[i.a] = i.wide ? r.bits : (r.bits & 0xffffffffull);
        break;
      }
      case VOp::FAlu: R[i.a] = wasm::eval_float(static_cast<wasm::FloatOp>(i.sub), i.wide, R[i.b], R[i.c]); break;
      case VOp::FUnary: R[i.a] = wasm::eval_float_unary(static_cast<wasm::FloatUnOp>(i.sub), i.wide, R[i.b]); break;
      case VOp::Cvt: {
        auto r = wasm::eval_conversion(static_cast<wasm::Conversion>(i.sub), R[i.b]);
        if (r.trap != TrapKind::None) {
          trap_to(i, r.trap);
          continue;
        }
        R[i.a] = r.bits;
        break;
      }
      case VOp::Cmp:
      case VOp::CmpImm:
        cmp_a = R[i.b];
        cmp_b = i.op == VOp::Cmp ? R[i.c] : static_cast<uint64_t>(i.imm);
        cmp_wide = i.wide;
        break;
      case VOp::SetCC: R[i.a] = wasm::eval_cond(static_cast<wasm::Cond>(i.sub), cmp_wide, cmp_a, cmp_b) ? 1 : 0; break;
      case VOp::BrCC:
      case VOp::BrCCImm: {
        uint64_t y = i.op == VOp::BrCC ? R[i.c] : static_cast<uint64_t>(i.imm);
        if (wasm::eval_cond(static_cast<wasm::Cond>(i.sub), i.wide, R[i.b], y)) {
          vpc = i.target;
          continue;
        }
        break;
      }
      case VOp::Jmp: vpc = i.target; continue;
      case VOp::BrTable: {
        const auto& t = tables[i.aux];
        uint64_t k = static_cast<uint32_t>(R[i.b]);
        vpc = t[std::min<uint64_t>(k, t.size() - 1)];
        continue;
      }
      case VOp::Call:
      case VOp::HostCall: {
        W[fp + runtime::kMetaIp] = vpc + 1;
        a.pause = Pause::Call;
        a.pause_pc = i.src_pc;
        a.height = i.slot;
        Exit e;
        e.kind = Exit::Kind::Call;
        e.callee = i.aux;
        e.argbase = i.slot;
        return e;
      }
      case VOp::Ret: {
        Exit e;
        e.kind = Exit::Kind::Return;
        auto res = es.module.func_type(a.func).result;
        if (res) e.value = wasm::is_float(*res) ? R[visa::kX0] : R[visa::kR0];
        return e;
      }
      case VOp::MemLoad:
      case VOp::MemLoadAbs: {
        auto k = static_cast<wasm::MemKind>(i.sub);
        uint32_t w = mem_width(k);
        uint64_t ea = static_cast<uint64_t>(i.imm);
        if (i.op == VOp::MemLoad) ea += static_cast<uint32_t>(R[i.b]);
        if (!in_bounds(ea, w)) {
          trap_to(i, TrapKind::OutOfBounds);
          continue;
        }
        uint64_t v = 0;
        std::memcpy(&v, es.memory.data() + ea, w);
        R[i.a] = v;
        break;
      }
      case VOp::MemStore:
      case VOp::MemStoreAbs: {
        auto k = static_cast<wasm::MemKind>(i.sub);
        uint32_t w = mem_width(k);
        uint64_t ea = static_cast<uint64_t>(i.imm);
        if (i.op == VOp::MemStore) ea += static_cast<uint32_t>(R[i.b]);
        if (!in_bounds(ea, w)) {
          trap_to(i, TrapKind::OutOfBounds);
          continue;
        }
        uint64_t v = R[i.a];
        std::memcpy(es.memory.data() + ea, &v, w);
        break;
      }
      case VOp::MemSize: R[i.a] = es.pages(); break;
      case VOp::MemGrow: R[i.a] = es.grow(static_cast<uint32_t>(R[i.b])); break;
      case VOp::GlobalLoad: R[i.a] = es.globals[i.aux]; break;
      case VOp::GlobalStore: es.globals[i.aux] = R[i.a]; break;
      case VOp::Trap: {
        W[fp + runtime::kMetaIp] = vpc;
        a.height = i.slot;
        a.pause_pc = i.aux;
        Exit e;
        e.kind = Exit::Kind::Trap;
        auto sub = static_cast<TrapKind>(i.sub);
        e.trap = sub != TrapKind::None ? sub : pending;
        e.pc = i.aux;
        e.height = i.slot;
        return e;
      }
    }
    vpc++;
  }
}

}  // namespace spc::emu
