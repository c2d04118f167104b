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

#ifndef SPC_WASM_OPCODES_H
#define SPC_WASM_OPCODES_H

#include <cstdint>
#include <optional>
#include <string_view>

#include "spc/wasm/types.h"

namespace spc::wasm {

#define SPC_FOREACH_OPCODE(V)          \
  V(Unreachable, 0x00, "unreachable")  \
  V(Nop, 0x01, "nop")                  \
  V(Block, 0x02, "block")              \
  V(Loop, 0x03, "loop")                \
  V(If, 0x04, "if")                    \
  V(Else, 0x05, "else")                \
  V(End, 0x0b, "end")                  \
  V(Br, 0x0c, "br")                    \
  V(BrIf, 0x0d, "br_if")               \
  V(BrTable, 0x0e, "br_table")         \
  V(Return, 0x0f, "return")            \
  V(Call, 0x10, "call")                \
  V(Drop, 0x1a, "drop")                \
  V(Select, 0x1b, "select")            \
  V(SelectT, 0x1c, "select_t")         \
  V(LocalGet, 0x20, "local.get")       \
  V(LocalSet, 0x21, "local.set")       \
  V(LocalTee, 0x22, "local.tee")       \
  V(GlobalGet, 0x23, "global.get")     \
  V(GlobalSet, 0x24, "global.set")     \
  V(I32Load, 0x28, "i32.load")         \
  V(I64Load, 0x29, "i64.load")         \
  V(F32Load, 0x2a, "f32.load")         \
  V(F64Load, 0x2b, "f64.load")         \
  V(I32Load8U, 0x2d, "i32.load8_u")    \
  V(I32Store, 0x36, "i32.store")       \
  V(I64Store, 0x37, "i64.store")       \
  V(F32Store, 0x38, "f32.store")       \
  V(F64Store, 0x39, "f64.store")       \
  V(I32Store8, 0x3a, "i32.store8")     \
  V(MemorySize, 0x3f, "memory.size")   \
  V(MemoryGrow, 0x40, "memory.grow")   \
  V(I32Const, 0x41, "i32.const")       \
  V(I64Const, 0x42, "i64.const")       \
  V(F32Const, 0x43, "f32.const")       \
  V(F64Const, 0x44, "f64.const")       \
  V(I32Eqz, 0x45, "i32.eqz")           \
  V(I32Eq, 0x46, "i32.eq")             \
  V(I32Ne, 0x47, "i32.ne")             \
  V(I32LtS, 0x48, "i32.lt_s")          \
  V(I32LtU, 0x49, "i32.lt_u")          \
  V(I32GtS, 0x4a, "i32.gt_s")          \
  V(I32GtU, 0x4b, "i32.gt_u")          \
  V(I32LeS, 0x4c, "i32.le_s")          \
  V(I32LeU, 0x4d, "i32.le_u")          \
  V(I32GeS, 0x4e, "i32.ge_s")          \
  V(I32GeU, 0x4f, "i32.ge_u")          \
  V(I64Eqz, 0x50, "i64.eqz")           \
  V(I64Eq, 0x51, "i64.eq")             \
  V(I64Ne, 0x52, "i64.ne")             \
  V(I64LtS, 0x53, "i64.lt_s")          \
  V(I64LtU, 0x54, "i64.lt_u")          \
  V(I64GtS, 0x55, "i64.gt_s")          \
  V(I64GtU, 0x56, "i64.gt_u")          \
  V(I64LeS, 0x57, "i64.le_s")          \
  V(I64LeU, 0x58, "i64.le_u")          \
  V(I64GeS, 0x59, "i64.ge_s")          \
  V(I64GeU, 0x5a, "i64.ge_u")          \
  V(F32Eq, 0x5b, "f32.eq")             \
  V(F32Ne, 0x5c, "f32.ne")             \
  V(F32Lt, 0x5d, "f32.lt")             \
  V(F32Gt, 0x5e, "f32.gt")             \
  V(F32Le, 0x5f, "f32.le")             \
  V(F32Ge, 0x60, "f32.ge")             \
  V(F64Eq, 0x61, "f64.eq")             \
  V(F64Ne, 0x62, "f64.ne")             \
  V(F64Lt, 0x63, "f64.lt")             \
  V(F64Gt, 0x64, "f64.gt")             \
  V(F64Le, 0x65, "f64.le")             \
  V(F64Ge, 0x66, "f64.ge")             \
  V(I32Add, 0x6a, "i32.add")           \
  V(I32Sub, 0x6b, "i32.sub")           \
  V(I32Mul, 0x6c, "i32.mul")           \
  V(I32DivS, 0x6d, "i32.div_s")        \
  V(I32DivU, 0x6e, "i32.div_u")        \
  V(I32RemS, 0x6f, "i32.rem_s")        \
  V(I32RemU, 0x70, "i32.rem_u")        \
  V(I32And, 0x71, "i32.and")           \
  V(I32Or, 0x72, "i32.or")             \
  V(I32Xor, 0x73, "i32.xor")           \
  V(I32Shl, 0x74, "i32.shl")           \
  V(I32ShrS, 0x75, "i32.shr_s")        \
  V(I32ShrU, 0x76, "i32.shr_u")        \
  V(I64Add, 0x7c, "i64.add")           \
  V(I64Sub, 0x7d, "i64.sub")           \
  V(I64Mul, 0x7e, "i64.mul")           \
  V(I64DivS, 0x7f, "i64.div_s")        \
  V(I64DivU, 0x80, "i64.div_u")        \
  V(I64RemS, 0x81, "i64.rem_s")        \
  V(I64RemU, 0x82, "i64.rem_u")        \
  V(I64And, 0x83, "i64.and")           \
  V(I64Or, 0x84, "i64.or")             \
  V(I64Xor, 0x85, "i64.xor")           \
  V(I64Shl, 0x86, "i64.shl")           \
  V(I64ShrS, 0x87, "i64.shr_s")        \
  V(I64ShrU, 0x88, "i64.shr_u")        \
  V(F32Abs, 0x8b, "f32.abs")           \
  V(F32Neg, 0x8c, "f32.neg")           \
  V(F32Sqrt, 0x91, "f32.sqrt")         \
  V(F32Add, 0x92, "f32.add")           \
  V(F32Sub, 0x93, "f32.sub")           \
  V(F32Mul, 0x94, "f32.mul")           \
  V(F32Div, 0x95, "f32.div")           \
  V(F64Abs, 0x99, "f64.abs")           \
  V(F64Neg, 0x9a, "f64.neg")           \
  V(F64Sqrt, 0x9f, "f64.sqrt")         \
  V(F64Add, 0xa0, "f64.add")           \
  V(F64Sub, 0xa1, "f64.sub")           \
  V(F64Mul, 0xa2, "f64.mul")           \
  V(F64Div, 0xa3, "f64.div")           \
  V(I32WrapI64, 0xa7, "i32.wrap_i64")  \
  V(I32TruncF64S, 0xaa, "i32.trunc_f64_s") \
  V(I64ExtendI32S, 0xac, "i64.extend_i32_s") \
  V(I64ExtendI32U, 0xad, "i64.extend_i32_u") \
  V(F64ConvertI32S, 0xb7, "f64.convert_i32_s") \
  V(RefNull, 0xd0, "ref.null")         \
  V(RefIsNull, 0xd1, "ref.is_null")

enum class Opcode : uint8_t {
#define V(name, code, text) name = code,
  SPC_FOREACH_OPCODE(V)
#undef V
};

// Returns nullopt for bytes outside the supported subset.
std::optional<Opcode> opcode_from_byte(uint8_t b);
std::string_view opcode_name(Opcode op);

// Integer ALU operations shared by the interpreter, folding and the vISA.
enum class IntOp : uint8_t { Add, Sub, Mul, DivS, DivU, RemS, RemU, And, Or, Xor, Shl, ShrS, ShrU };
enum class FloatOp : uint8_t { Add, Sub, Mul, Div };
enum class FloatUnOp : uint8_t { Neg, Abs, Sqrt };

// Comparison conditions; the F* conditions are IEEE ordered comparisons.
enum class Cond : uint8_t { Eq, Ne, LtS, LtU, GtS, GtU, LeS, LeU, GeS, GeU, FEq, FNe, FLt, FGt, FLe, FGe };

enum class Conversion : uint8_t { WrapI64, ExtendI32S, ExtendI32U, F64ConvertI32S, I32TruncF64S };

std::string_view int_op_name(IntOp op);
std::string_view float_op_name(FloatOp op);
std::string_view float_unop_name(FloatUnOp op);
std::string_view cond_name(Cond c);
std::string_view conversion_name(Conversion c);

bool is_commutative(IntOp op);
// Integer conditions have an exact negation; float conditions do not (NaN).
std::optional<Cond> negate(Cond c);
// Condition with operands swapped: a < b  <=>  b > a.
Cond swap_operands(Cond c);

// Classification helpers over the subset.
struct BinaryIntInfo {
  IntOp op;
  ValType type;
};
std::optional<BinaryIntInfo> binary_int_info(Opcode op);

struct CompareInfo {
  Cond cond;
  ValType operand;  // type of the compared operands
  bool unary;       // eqz
};
std::optional<CompareInfo> compare_info(Opcode op);

struct BinaryFloatInfo {
  FloatOp op;
  ValType type;
};
std::optional<BinaryFloatInfo> binary_float_info(Opcode op);

struct UnaryFloatInfo {
  FloatUnOp op;
  ValType type;
};
std::optional<UnaryFloatInfo> unary_float_info(Opcode op);

struct ConversionInfo {
  Conversion conv;
  ValType from;
  ValType to;
};
std::optional<ConversionInfo> conversion_info(Opcode op);

enum class MemKind : uint8_t { I32, I64, F32, F64, I32_8U };

struct MemAccessInfo {
  MemKind kind;
  ValType type;
  bool store;
  uint32_t width;  // bytes accessed
};
std::optional<MemAccessInfo> mem_access_info(Opcode op);
std::string_view mem_kind_name(MemKind k);

}  // namespace spc::wasm

#endif  // SPC_WASM_OPCODES_H
