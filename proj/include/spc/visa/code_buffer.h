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

#ifndef SPC_VISA_CODE_BUFFER_H
#define SPC_VISA_CODE_BUFFER_H

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "spc/visa/isa.h"

namespace spc::visa {

class FinalizeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using Label = uint32_t;

// Instruction sequence with label patching. Before finalize, branch targets
// hold label ids; afterwards they hold instruction indices.
class CodeBuffer {
 public:
  Label new_label();
  void bind(Label l);
  bool is_bound(Label l) const { return label_pos_.at(l) != kNoLabel; }

  void set_src_pc(uint32_t pc);
  uint32_t src_pc() const { return src_pc_; }

  uint32_t emit(Instr i);
  uint32_t add_table(std::vector<Label> labels);

  uint32_t size() const { return static_cast<uint32_t>(instrs_.size()); }
  const Instr& at(uint32_t i) const { return instrs_[i]; }
  Instr& at(uint32_t i) { return instrs_[i]; }
  const std::vector<Instr>& instrs() const { return instrs_; }
  const std::vector<std::vector<uint32_t>>& tables() const { return tables_; }

  // Number of trailing instructions that can be removed or rewritten without
  // crossing a bound label.
  uint32_t retractable() const { return size() - last_bind_; }
  void pop_back();

  void finalize();
  bool finalized() const { return finalized_; }
  uint32_t label_position(Label l) const { return label_pos_.at(l); }

 private:
  std::vector<Instr> instrs_;
  std::vector<uint32_t> label_pos_;
  std::vector<std::vector<uint32_t>> tables_;
  uint32_t src_pc_ = 0;
  uint32_t last_bind_ = 0;
  bool finalized_ = false;
};

std::string disassemble_instr(const Instr& i, const CodeBuffer& buf);
std::string disassemble(const CodeBuffer& buf);

}  // namespace spc::visa

#endif  // SPC_VISA_CODE_BUFFER_H
