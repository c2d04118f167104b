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

#ifndef SPC_COMPILER_ABSTRACT_STATE_H
#define SPC_COMPILER_ABSTRACT_STATE_H

#include <array>
#include <cstdint>
#include <vector>

#include "spc/visa/code_buffer.h"
#include "spc/wasm/types.h"

namespace spc::compiler {

using visa::Reg;
using wasm::Tag;
using wasm::ValType;

// Compile-time knowledge about one frame slot. A live slot is materializable
// from at least one of: its frame slot (stored), a register, a constant.
struct AbstractValue {
  ValType type = ValType::I32;
  bool stored = false;
  Reg reg = visa::kNoReg;
  bool has_konst = false;
  uint64_t konst = 0;

  bool materializable() const { return stored || reg != visa::kNoReg || has_konst; }
  bool operator==(const AbstractValue&) const = default;
};

// Frozen copy of the live part of an abstract state.
struct StateSnapshot {
  uint32_t height = 0;
  std::vector<AbstractValue> slots;
  std::vector<Tag> tags;  // known tag bytes in the frame; Untagged = unknown
};

using RegMask = uint32_t;
constexpr RegMask reg_bit(Reg r) { return RegMask{1} << r; }

// Slots are indexed as frame slots: locals first, then the operand stack.
class AbstractState {
 public:
  AbstractState(uint32_t num_locals, uint32_t max_slots, bool multi_reg);

  uint32_t num_locals() const { return num_locals_; }
  uint32_t height() const { return height_; }
  uint32_t capacity() const { return static_cast<uint32_t>(slots_.size()); }
  bool multi_reg() const { return multi_reg_; }

  AbstractValue& slot(uint32_t i) { return slots_[i]; }
  const AbstractValue& slot(uint32_t i) const { return slots_[i]; }
  Tag tag_mem(uint32_t i) const { return tags_[i]; }
  void set_tag_mem(uint32_t i, Tag t) { tags_[i] = t; }

  // Pushes a fresh operand slot and returns its index.
  uint32_t push(ValType t);
  // Pops the top operand slot, releasing any register binding.
  AbstractValue pop();
  void set_height(uint32_t h);

  void bind(uint32_t slot, Reg r);
  void unbind(uint32_t slot);
  void unbind_all();
  const std::vector<uint32_t>& holders(Reg r) const { return regs_[r].holders; }
  bool reg_free(Reg r) const { return regs_[r].holders.empty(); }

  // Chooses a register of the class needed for t. Prefers the lowest free
  // register, then the least recently bound register whose slots are all
  // materializable without it, then the least recently bound register,
  // spilling its slots through buf.
  Reg alloc_reg(ValType t, visa::CodeBuffer& buf, RegMask locked = 0, Reg hint = visa::kNoReg);

  StateSnapshot snapshot() const;
  void restore(const StateSnapshot& s);

  // Checks slot.reg <-> holders consistency and the single-holder rule.
  bool consistent() const;

 private:
  struct RegInfo {
    std::vector<uint32_t> holders;
    uint64_t bind_time = 0;
  };

  uint32_t num_locals_;
  uint32_t height_;
  bool multi_reg_;
  std::vector<AbstractValue> slots_;
  std::vector<Tag> tags_;
  std::array<RegInfo, visa::kNumRegs> regs_;
  uint64_t clock_ = 0;
};

}  // namespace spc::compiler

#endif  // SPC_COMPILER_ABSTRACT_STATE_H
