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

#include "spc/visa/code_buffer.h"

#include <cinttypes>
#include <cstdio>

namespace spc::visa {

std::string reg_name(Reg r) {
  if (r == kRT) return "rt";
  if (r == kXT) return "xt";
  if (r < kRT) return "r" + std::to_string(r);
  if (r >= kX0 && r < kXT) return "x" + std::to_string(r - kX0);
  return "?";
}

std::string_view trap_code_name(TrapKind k) {
  switch (k) {
    case TrapKind::None: return "none";
    case TrapKind::Unreachable: return "unreachable";
    case TrapKind::DivByZero: return "div_by_zero";
    case TrapKind::IntegerOverflow: return "int_overflow";
    case TrapKind::OutOfBounds: return "oob";
    case TrapKind::TruncError: return "trunc";
    case TrapKind::StackOverflow: return "stack_overflow";
    case TrapKind::ScanError: return "scan_error";
  }
  return "?";
}

Label CodeBuffer::new_label() {
  label_pos_.push_back(kNoLabel);
  return static_cast<Label>(label_pos_.size() - 1);
}

void CodeBuffer::bind(Label l) {
  if (finalized_) throw FinalizeError("bind after finalize");
  if (label_pos_.at(l) != kNoLabel) throw FinalizeError("label bound twice");
  label_pos_[l] = size();
  last_bind_ = size();
}

void CodeBuffer::set_src_pc(uint32_t pc) {
  if (pc > src_pc_) src_pc_ = pc;
}

uint32_t CodeBuffer::emit(Instr i) {
  if (finalized_) throw FinalizeError("emit after finalize");
  i.src_pc = src_pc_;
  instrs_.push_back(i);
  return size() - 1;
}

uint32_t CodeBuffer::add_table(std::vector<Label> labels) {
  tables_.push_back(std::move(labels));
  return static_cast<uint32_t>(tables_.size() - 1);
}

void CodeBuffer::pop_back() {
  if (retractable() == 0) throw FinalizeError("cannot retract across a bound label");
  instrs_.pop_back();
}

void CodeBuffer::finalize() {
  if (finalized_) return;
  auto resolve = [&](uint32_t& l) {
    if (l == kNoLabel) return;
    if (l >= label_pos_.size() || label_pos_[l] == kNoLabel)
      throw FinalizeError("unbound label " + std::to_string(l));
    l = label_pos_[l];
  };
  for (Instr& i : instrs_) {
    resolve(i.trap_target);
    if (i.op == VOp::BrCC || i.op == VOp::BrCCImm || i.op == VOp::Jmp) {
      if (i.target == kNoLabel) throw FinalizeError("branch without target");
      resolve(i.target);
    }
  }
  for (auto& t : tables_)
    for (uint32_t& l : t) resolve(l);
  finalized_ = true;
}

namespace {

std::string slot_ref(uint32_t s) { return "[vfp+" + std::to_string(s) + "]"; }

std::string imm_str(int64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "#%" PRId64, v);
  return buf;
}

std::string target_str(uint32_t t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "@%04u", t);
  return buf;
}

const char* width(bool wide) { return wide ? "64" : "32"; }

}  // namespace

std::string disassemble_instr(const Instr& i, const CodeBuffer& buf) {
  std::string s;
  std::string w = width(i.wide);
  switch (i.op) {
    case VOp::MovRR: s = "mov " + reg_name(i.a) + ", " + reg_name(i.b); break;
    case VOp::MovRI: s = "mov " + reg_name(i.a) + ", " + imm_str(i.imm); break;
    case VOp::LoadSlot: s = "load.slot " + reg_name(i.a) + ", " + slot_ref(i.slot); break;
    case VOp::StoreSlot: s = "store.slot " + reg_name(i.a) + ", " + slot_ref(i.slot); break;
    case VOp::StoreSlotImm: s = "store.slot " + imm_str(i.imm) + ", " + slot_ref(i.slot); break;
    case VOp::StoreTag:
      s = "store.tag " + slot_ref(i.slot) + ", #" + std::string(wasm::tag_name(static_cast<Tag>(i.sub)));
      break;
    case VOp::Alu:
      s = std::string(wasm::int_op_name(static_cast<IntOp>(i.sub))) + "." + w + " " + reg_name(i.a) + ", " +
          reg_name(i.b) + ", " + reg_name(i.c);
      break;
    case VOp::AluImm:
      s = std::string(wasm::int_op_name(static_cast<IntOp>(i.sub))) + "." + w + " " + reg_name(i.a) + ", " +
          reg_name(i.b) + ", " + imm_str(i.imm);
      break;
    case VOp::FAlu:
      s = std::string(wasm::float_op_name(static_cast<FloatOp>(i.sub))) + "." + w + " " + reg_name(i.a) + ", " +
          reg_name(i.b) + ", " + reg_name(i.c);
      break;
    case VOp::FUnary:
      s = std::string(wasm::float_unop_name(static_cast<FloatUnOp>(i.sub))) + "." + w + " " + reg_name(i.a) +
          ", " + reg_name(i.b);
      break;
    case VOp::Cvt:
      s = "cvt." + std::string(wasm::conversion_name(static_cast<Conversion>(i.sub))) + " " + reg_name(i.a) +
          ", " + reg_name(i.b);
      break;
    case VOp::Cmp: s = "cmp." + w + " " + reg_name(i.b) + ", " + reg_name(i.c); break;
    case VOp::CmpImm: s = "cmp." + w + " " + reg_name(i.b) + ", " + imm_str(i.imm); break;
    case VOp::SetCC:
      s = "set." + std::string(wasm::cond_name(static_cast<Cond>(i.sub))) + " " + reg_name(i.a);
      break;
    case VOp::BrCC:
      s = "br." + std::string(wasm::cond_name(static_cast<Cond>(i.sub))) + "." + w + " " + reg_name(i.b) + ", " +
          reg_name(i.c) + ", " + target_str(i.target);
      break;
    case VOp::BrCCImm:
      s = "br." + std::string(wasm::cond_name(static_cast<Cond>(i.sub))) + "." + w + " " + reg_name(i.b) + ", " +
          imm_str(i.imm) + ", " + target_str(i.target);
      break;
    case VOp::Jmp: s = "jmp " + target_str(i.target); break;
    case VOp::BrTable: {
      s = "br_table " + reg_name(i.b) + ", [";
      const auto& t = buf.tables().at(i.aux);
      for (size_t k = 0; k < t.size(); k++) {
        if (k) s += ", ";
        s += target_str(t[k]);
      }
      s += "]";
      break;
    }
    case VOp::Call: s = "call f" + std::to_string(i.aux) + ", " + slot_ref(i.slot); break;
    case VOp::HostCall: s = "hostcall f" + std::to_string(i.aux) + ", " + slot_ref(i.slot); break;
    case VOp::Ret: s = "ret"; break;
    case VOp::MemLoad:
      s = "mem.load." + std::string(wasm::mem_kind_name(static_cast<MemKind>(i.sub))) + " " + reg_name(i.a) +
          ", [" + reg_name(i.b) + "+" + std::to_string(i.imm) + "]";
      break;
    case VOp::MemLoadAbs:
      s = "mem.load." + std::string(wasm::mem_kind_name(static_cast<MemKind>(i.sub))) + " " + reg_name(i.a) +
          ", [" + imm_str(i.imm) + "]";
      break;
    case VOp::MemStore:
      s = "mem.store." + std::string(wasm::mem_kind_name(static_cast<MemKind>(i.sub))) + " " + reg_name(i.a) +
          ", [" + reg_name(i.b) + "+" + std::to_string(i.imm) + "]";
      break;
    case VOp::MemStoreAbs:
      s = "mem.store." + std::string(wasm::mem_kind_name(static_cast<MemKind>(i.sub))) + " " + reg_name(i.a) +
          ", [" + imm_str(i.imm) + "]";
      break;
    case VOp::MemSize: s = "mem.size " + reg_name(i.a); break;
    case VOp::MemGrow: s = "mem.grow " + reg_name(i.a) + ", " + reg_name(i.b); break;
    case VOp::GlobalLoad: s = "global.load " + reg_name(i.a) + ", g" + std::to_string(i.aux); break;
    case VOp::GlobalStore: s = "global.store " + reg_name(i.a) + ", g" + std::to_string(i.aux); break;
    case VOp::Trap:
      s = "trap " + std::string(trap_code_name(static_cast<TrapKind>(i.sub))) + ", wasm@" + std::to_string(i.aux);
      break;
  }
  if (i.trap_target != kNoLabel) s += " !" + target_str(i.trap_target);
  return s;
}

std::string disassemble(const CodeBuffer& buf) {
  std::string out;
  char head[16];
  for (uint32_t k = 0; k < buf.size(); k++) {
    const Instr& i = buf.at(k);
    std::snprintf(head, sizeof head, "%04u: ", k);
    out += head;
    out += disassemble_instr(i, buf);
    out += " ; wasm@" + std::to_string(i.src_pc) + "\n";
  }
  return out;
}

}  // namespace spc::visa
