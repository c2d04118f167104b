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

#include "spc/compiler/abstract_state.h"

#include <algorithm>
#include <stdexcept>

namespace spc::compiler {

using visa::Instr;
using visa::kNoReg;
using visa::VOp;

AbstractState::AbstractState(uint32_t num_locals, uint32_t max_slots, bool multi_reg)
    : num_locals_(num_locals),
      height_(num_locals),
      multi_reg_(multi_reg),
      slots_(max_slots),
      tags_(max_slots, Tag::Untagged) {}

uint32_t AbstractState::push(ValType t) {
  if (height_ >= slots_.size()) throw std::logic_error("abstract stack overflow");
  uint32_t i = height_++;
  slots_[i] = AbstractValue{t, false, kNoReg, false, 0};
  return i;
}

AbstractValue AbstractState::pop() {
  if (height_ <= num_locals_) throw std::logic_error("abstract stack underflow");
  uint32_t i = --height_;
  AbstractValue v = slots_[i];
  unbind(i);
  return v;
}

void AbstractState::set_height(uint32_t h) {
  while (height_ > h) pop();
  height_ = h;
}

void AbstractState::bind(uint32_t slot, Reg r) {
  AbstractValue& v = slots_[slot];
  if (v.reg == r) return;
  if (v.reg != kNoReg) unbind(slot);
  v.reg = r;
  regs_[r].holders.push_back(slot);
  regs_[r].bind_time = ++clock_;
}

void AbstractState::unbind(uint32_t slot) {
  AbstractValue& v = slots_[slot];
  if (v.reg == kNoReg) return;
  auto& h = regs_[v.reg].holders;
  for (size_t k = h.size(); k-- > 0;) {
    if (h[k] == slot) {
      h.erase(h.begin() + static_cast<long>(k));
      break;
    }
  }
  v.reg = kNoReg;
}

void AbstractState::unbind_all() {
  for (auto& r : regs_) {
    for (uint32_t s : r.holders) slots_[s].reg = kNoReg;
    r.holders.clear();
  }
}

Reg AbstractState::alloc_reg(ValType t, visa::CodeBuffer& buf, RegMask locked, Reg hint) {
  bool fl = wasm::is_float(t);
  Reg first = fl ? visa::kX0 : visa::kR0;
  Reg last = static_cast<Reg>(first + (fl ? visa::kNumFloatRegs : visa::kNumIntRegs));
  auto usable = [&](Reg r) { return !(locked & reg_bit(r)); };
  if (hint != kNoReg && hint >= first && hint < last && usable(hint) && regs_[hint].holders.empty()) return hint;
  for (Reg r = first; r < last; r++)
    if (usable(r) && regs_[r].holders.empty()) return r;

  Reg best = kNoReg;
  for (Reg r = first; r < last; r++) {
    if (!usable(r)) continue;
    bool cheap = std::all_of(regs_[r].holders.begin(), regs_[r].holders.end(), [&](uint32_t s) {
      return slots_[s].stored || slots_[s].has_konst;
    });
    if (cheap && (best == kNoReg || regs_[r].bind_time < regs_[best].bind_time)) best = r;
  }
  if (best == kNoReg) {
    for (Reg r = first; r < last; r++)
      if (usable(r) && (best == kNoReg || regs_[r].bind_time < regs_[best].bind_time)) best = r;
  }
  if (best == kNoReg) throw std::logic_error("no allocatable register");
  auto holders = regs_[best].holders;
  for (uint32_t s : holders) {
    AbstractValue& v = slots_[s];
    if (!v.stored && !v.has_konst) {
      Instr st;
      st.op = VOp::StoreSlot;
      st.a = best;
      st.slot = s;
      buf.emit(st);
      v.stored = true;
    }
    unbind(s);
  }
  return best;
}

StateSnapshot AbstractState::snapshot() const {
  StateSnapshot s;
  s.height = height_;
  s.slots.assign(slots_.begin(), slots_.begin() + height_);
  s.tags.assign(tags_.begin(), tags_.begin() + height_);
  return s;
}

void AbstractState::restore(const StateSnapshot& s) {
  unbind_all();
  height_ = s.height;
  std::copy(s.tags.begin(), s.tags.end(), tags_.begin());
  std::fill(tags_.begin() + s.height, tags_.end(), Tag::Untagged);
  for (uint32_t i = 0; i < s.height; i++) {
    slots_[i] = s.slots[i];
    slots_[i].reg = kNoReg;
    if (s.slots[i].reg != kNoReg) bind(i, s.slots[i].reg);
  }
}

bool AbstractState::consistent() const {
  for (Reg r = 0; r < visa::kNumRegs; r++) {
    const auto& h = regs_[r].holders;
    if (!multi_reg_ && h.size() > 1) return false;
    if (visa::is_scratch(r) && !h.empty()) return false;
    for (uint32_t s : h)
      if (s >= height_ || slots_[s].reg != r) return false;
  }
  for (uint32_t i = 0; i < height_; i++) {
    const AbstractValue& v = slots_[i];
    if (!v.materializable()) return false;
    if (v.reg != kNoReg) {
      const auto& h = regs_[v.reg].holders;
      if (std::find(h.begin(), h.end(), i) == h.end()) return false;
      if (wasm::is_float(v.type) != visa::is_float_reg(v.reg)) return false;
    }
  }
  return true;
}

}  // namespace spc::compiler
