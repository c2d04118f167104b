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

#ifndef SPC_VISA_ISA_H
#define SPC_VISA_ISA_H

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "spc/wasm/numeric.h"
#include "spc/wasm/opcodes.h"
#include "spc/wasm/types.h"

namespace spc::visa {

using wasm::Cond;
using wasm::Conversion;
using wasm::FloatOp;
using wasm::FloatUnOp;
using wasm::IntOp;
using wasm::MemKind;
using wasm::Tag;
using wasm::TrapKind;

// r0-r7 and x0-x7 are allocatable; rt and xt are scratch registers reserved
// for conforming moves and immediate materialization.
using Reg = uint8_t;
constexpr Reg kNumIntRegs = 8;
constexpr Reg kNumFloatRegs = 8;
constexpr Reg kR0 = 0;
constexpr Reg kRT = 8;
constexpr Reg kX0 = 9;
constexpr Reg kXT = 17;
constexpr Reg kNumRegs = 18;
constexpr Reg kNoReg = 0xff;

constexpr bool is_float_reg(Reg r) { return r >= kX0 && r <= kXT; }
constexpr bool is_scratch(Reg r) { return r == kRT || r == kXT; }
std::string reg_name(Reg r);

constexpr uint32_t kNoLabel = std::numeric_limits<uint32_t>::max();

enum class VOp : uint8_t {
  MovRR,         // a <- b
  MovRI,         // a <- imm (64-bit)
  LoadSlot,      // a <- [vfp+slot]
  StoreSlot,     // [vfp+slot] <- a
  StoreSlotImm,  // [vfp+slot] <- imm (32-bit sign-extended)
  StoreTag,      // tags[vfp+slot] <- sub
  Alu,           // a <- b op c
  AluImm,        // a <- b op imm (32-bit sign-extended)
  FAlu,          // a <- b fop c
  FUnary,        // a <- fop b
  Cvt,           // a <- conv b
  Cmp,           // flags <- (b, c)
  CmpImm,        // flags <- (b, imm)
  SetCC,         // a <- cond(flags)
  BrCC,          // if cond(b, c) goto target
  BrCCImm,       // if cond(b, imm) goto target
  Jmp,           // goto target
  BrTable,       // goto tables[aux][min(b, n)]
  Call,          // call function aux, arguments at [vfp+slot]
  HostCall,      // call import aux, arguments at [vfp+slot]
  Ret,
  MemLoad,       // a <- mem[b + imm]
  MemLoadAbs,    // a <- mem[imm]
  MemStore,      // mem[b + imm] <- a
  MemStoreAbs,   // mem[imm] <- a
  MemSize,       // a <- pages
  MemGrow,       // a <- grow(b)
  GlobalLoad,    // a <- globals[aux]
  GlobalStore,   // globals[aux] <- a
  Trap,          // trap sub at wasm pc aux with slot live frame slots
};

struct Instr {
  VOp op = VOp::Ret;
  Reg a = kNoReg;
  Reg b = kNoReg;
  Reg c = kNoReg;
  uint8_t sub = 0;
  bool wide = false;
  int64_t imm = 0;
  uint32_t slot = 0;
  uint32_t aux = 0;
  uint32_t target = kNoLabel;
  uint32_t trap_target = kNoLabel;  // out-of-line trap path, if any
  uint32_t src_pc = 0;

  bool operator==(const Instr&) const = default;
};

// Cost units: memory operations cost 2, calls 5, everything else 1.
constexpr uint32_t instr_cost(VOp op) {
  switch (op) {
    case VOp::MemLoad:
    case VOp::MemLoadAbs:
    case VOp::MemStore:
    case VOp::MemStoreAbs:
    case VOp::MemSize:
    case VOp::MemGrow:
      return 2;
    case VOp::Call:
    case VOp::HostCall:
      return 5;
    default:
      return 1;
  }
}

// Every instruction is accounted as 8 bytes of output code.
constexpr uint32_t kInstrBytes = 8;

constexpr bool fits_imm32(int64_t v) { return v >= INT32_MIN && v <= INT32_MAX; }

std::string_view trap_code_name(TrapKind k);

}  // namespace spc::visa

#endif  // SPC_VISA_ISA_H
