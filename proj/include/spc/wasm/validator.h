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

#ifndef SPC_WASM_VALIDATOR_H
#define SPC_WASM_VALIDATOR_H

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spc/wasm/cursor.h"
#include "spc/wasm/module.h"

namespace spc::wasm {

// Validates every defined function, filling in locals, sidetables and
// stack heights. Returns the validated functions.
const std::vector<WasmFunction>& validate(WasmModule& module);

// Validates one defined function. The tracker, if given, observes every
// body byte read.
void validate_function(WasmModule& module, uint32_t func, ReadTracker* tracker = nullptr);

// Operand-stack types in effect just before the instruction at pc executes.
// Returns nullopt if pc is not an instruction boundary or is unreachable.
std::optional<std::vector<ValType>> operand_types_at(const WasmModule& module, uint32_t func, uint32_t pc);

bool is_instruction_boundary(const WasmModule& module, uint32_t func, uint32_t pc);

// Operand types at every reachable instruction boundary; used by test-mode
// tag audits.
struct TypeMap {
  std::vector<int32_t> index;  // pc -> offset into types, -1 if none
  std::vector<uint32_t> heights;
  std::vector<ValType> types;

  std::optional<std::span<const ValType>> at(uint32_t pc) const;
};
TypeMap build_type_map(const WasmModule& module, uint32_t func);

}  // namespace spc::wasm

#endif  // SPC_WASM_VALIDATOR_H
