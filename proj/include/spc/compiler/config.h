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

#ifndef SPC_COMPILER_CONFIG_H
#define SPC_COMPILER_CONFIG_H

#include <optional>
#include <string>
#include <string_view>

namespace spc::compiler {

enum class Tagging : uint8_t { None, Eager, EagerOps, EagerLocals, OnDemand, Lazy };

std::string_view tagging_name(Tagging t);       // notags, eagertags, ...
std::string_view tagging_flag(Tagging t);       // none, eager, ...
std::optional<Tagging> tagging_from_flag(std::string_view s);

// Slots whose tag bytes the stack walker reads (the rest are reconstructed
// from types or not available at all).
bool walker_reads_local_tags(Tagging t);
bool walker_reads_operand_tags(Tagging t);
// Whether every write of such a slot stores its tag.
bool eager_local_tags(Tagging t);
bool eager_operand_tags(Tagging t);

struct CompilerConfig {
  bool track_consts = true;
  bool fold_consts = true;
  bool isel_imm = true;
  bool multi_reg = true;
  Tagging tagging = Tagging::OnDemand;
  // Mutation-testing hook: drops one register move when conforming to an
  // existing merge state.
  bool fault_broken_merge = false;
  // Checks register/slot consistency after every instruction.
  bool check_invariants = false;

  static CompilerConfig allopt() { return {}; }
  static CompilerConfig nok() {
    CompilerConfig c;
    c.track_consts = c.fold_consts = c.isel_imm = false;
    return c;
  }
  static CompilerConfig nokfold() {
    CompilerConfig c;
    c.fold_consts = false;
    return c;
  }
  static CompilerConfig noisel() {
    CompilerConfig c;
    c.isel_imm = false;
    return c;
  }
  static CompilerConfig nomr() {
    CompilerConfig c;
    c.multi_reg = false;
    return c;
  }

  bool well_formed() const { return (!fold_consts || track_consts) && (!isel_imm || track_consts); }
  // allopt, nok, nokfold, noisel, nomr or a '-'-joined combination.
  std::string ablation_name() const;
  // Ablation name plus a tagging suffix when not on-demand.
  std::string name() const;
};

std::optional<CompilerConfig> ablation_from_name(std::string_view name);

}  // namespace spc::compiler

#endif  // SPC_COMPILER_CONFIG_H
