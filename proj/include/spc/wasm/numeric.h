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

#ifndef SPC_WASM_NUMERIC_H
#define SPC_WASM_NUMERIC_H

#include <cstdint>
#include <optional>

#include "spc/wasm/opcodes.h"
#include "spc/wasm/types.h"

namespace spc::wasm {

enum class TrapKind : uint8_t {
  None,
  Unreachable,
  DivByZero,
  IntegerOverflow,
  OutOfBounds,
  TruncError,
  StackOverflow,
  ScanError,
};

std::string_view trap_name(TrapKind k);
std::string_view trap_kind_name(TrapKind k);  // DivByZero, ...

constexpr uint32_t kCanonicalNaN32 = 0x7fc00000u;
constexpr uint64_t kCanonicalNaN64 = 0x7ff8000000000000ull;

// Result of an operation on raw slot bits; trap != None means no value.
struct NumResult {
  uint64_t bits = 0;
  TrapKind trap = TrapKind::None;
};

// Narrow values are zero-extended in 64-bit containers.
constexpr uint64_t normalize(ValType t, uint64_t bits) {
  return is_narrow(t) ? (bits & 0xffffffffull) : bits;
}

NumResult eval_int(IntOp op, bool wide, uint64_t a, uint64_t b);
bool can_trap(IntOp op);
uint64_t eval_float(FloatOp op, bool wide, uint64_t a, uint64_t b);
uint64_t eval_float_unary(FloatUnOp op, bool wide, uint64_t a);
bool eval_cond(Cond c, bool wide, uint64_t a, uint64_t b);
NumResult eval_conversion(Conversion c, uint64_t a);

}  // namespace spc::wasm

#endif  // SPC_WASM_NUMERIC_H
