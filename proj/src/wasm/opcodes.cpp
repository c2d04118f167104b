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

#include "spc/wasm/opcodes.h"

#include <array>

namespace spc::wasm {

namespace {

struct OpcodeTable {
  std::array<bool, 256> valid{};
  std::array<std::string_view, 256> names{};

  constexpr OpcodeTable() {
#define V(name, code, text) \
  valid[code] = true;       \
  names[code] = text;
    SPC_FOREACH_OPCODE(V)
#undef V
  }
};

constexpr OpcodeTable kTable;

}  // namespace

std::optional<Opcode> opcode_from_byte(uint8_t b) {
  if (!kTable.valid[b]) return std::nullopt;
  return static_cast<Opcode>(b);
}

std::string_view opcode_name(Opcode op) { return kTable.names[static_cast<uint8_t>(op)]; }

std::string_view int_op_name(IntOp op) {
  static constexpr std::string_view kNames[] = {"add", "sub",  "mul", "div_s", "div_u", "rem_s", "rem_u",
                                                "and", "or",   "xor", "shl",   "shr_s", "shr_u"};
  return kNames[static_cast<int>(op)];
}

std::string_view float_op_name(FloatOp op) {
  static constexpr std::string_view kNames[] = {"fadd", "fsub", "fmul", "fdiv"};
  return kNames[static_cast<int>(op)];
}

std::string_view float_unop_name(FloatUnOp op) {
  static constexpr std::string_view kNames[] = {"fneg", "fabs", "fsqrt"};
  return kNames[static_cast<int>(op)];
}

std::string_view cond_name(Cond c) {
  static constexpr std::string_view kNames[] = {"eq",   "ne",   "lt_s", "lt_u", "gt_s", "gt_u", "le_s", "le_u",
                                                "ge_s", "ge_u", "feq",  "fne",  "flt",  "fgt",  "fle",  "fge"};
  return kNames[static_cast<int>(c)];
}

std::string_view conversion_name(Conversion c) {
  static constexpr std::string_view kNames[] = {"wrap", "extend_s", "extend_u", "cvt_f64_s", "trunc_s"};
  return kNames[static_cast<int>(c)];
}

std::string_view mem_kind_name(MemKind k) {
  static constexpr std::string_view kNames[] = {"32", "64", "f32", "f64", "8u"};
  return kNames[static_cast<int>(k)];
}

bool is_commutative(IntOp op) {
  switch (op) {
    case IntOp::Add:
    case IntOp::Mul:
    case IntOp::And:
    case IntOp::Or:
    case IntOp::Xor:
      return true;
    default:
      return false;
  }
}

std::optional<Cond> negate(Cond c) {
  switch (c) {
    case Cond::Eq: return Cond::Ne;
    case Cond::Ne: return Cond::Eq;
    case Cond::LtS: return Cond::GeS;
    case Cond::LtU: return Cond::GeU;
    case Cond::GtS: return Cond::LeS;
    case Cond::GtU: return Cond::LeU;
    case Cond::LeS: return Cond::GtS;
    case Cond::LeU: return Cond::GtU;
    case Cond::GeS: return Cond::LtS;
    case Cond::GeU: return Cond::LtU;
    case Cond::FEq: return Cond::FNe;
    case Cond::FNe: return Cond::FEq;
    default: return std::nullopt;
  }
}

Cond swap_operands(Cond c) {
  switch (c) {
    case Cond::LtS: return Cond::GtS;
    case Cond::LtU: return Cond::GtU;
    case Cond::GtS: return Cond::LtS;
    case Cond::GtU: return Cond::LtU;
    case Cond::LeS: return Cond::GeS;
    case Cond::LeU: return Cond::GeU;
    case Cond::GeS: return Cond::LeS;
    case Cond::GeU: return Cond::LeU;
    case Cond::FLt: return Cond::FGt;
    case Cond::FGt: return Cond::FLt;
    case Cond::FLe: return Cond::FGe;
    case Cond::FGe: return Cond::FLe;
    default: return c;
  }
}

std::optional<BinaryIntInfo> binary_int_info(Opcode op) {
  auto b = static_cast<uint8_t>(op);
  if (b >= 0x6a && b <= 0x76) return BinaryIntInfo{static_cast<IntOp>(b - 0x6a), ValType::I32};
  if (b >= 0x7c && b <= 0x88) return BinaryIntInfo{static_cast<IntOp>(b - 0x7c), ValType::I64};
  return std::nullopt;
}

std::optional<CompareInfo> compare_info(Opcode op) {
  auto b = static_cast<uint8_t>(op);
  if (b == 0x45) return CompareInfo{Cond::Eq, ValType::I32, true};
  if (b == 0x50) return CompareInfo{Cond::Eq, ValType::I64, true};
  if (b >= 0x46 && b <= 0x4f) return CompareInfo{static_cast<Cond>(b - 0x46), ValType::I32, false};
  if (b >= 0x51 && b <= 0x5a) return CompareInfo{static_cast<Cond>(b - 0x51), ValType::I64, false};
  if (b >= 0x5b && b <= 0x60) return CompareInfo{static_cast<Cond>(b - 0x5b + 10), ValType::F32, false};
  if (b >= 0x61 && b <= 0x66) return CompareInfo{static_cast<Cond>(b - 0x61 + 10), ValType::F64, false};
  return std::nullopt;
}

std::optional<BinaryFloatInfo> binary_float_info(Opcode op) {
  auto b = static_cast<uint8_t>(op);
  if (b >= 0x92 && b <= 0x95) return BinaryFloatInfo{static_cast<FloatOp>(b - 0x92), ValType::F32};
  if (b >= 0xa0 && b <= 0xa3) return BinaryFloatInfo{static_cast<FloatOp>(b - 0xa0), ValType::F64};
  return std::nullopt;
}

std::optional<UnaryFloatInfo> unary_float_info(Opcode op) {
  switch (op) {
    case Opcode::F32Abs: return UnaryFloatInfo{FloatUnOp::Abs, ValType::F32};
    case Opcode::F32Neg: return UnaryFloatInfo{FloatUnOp::Neg, ValType::F32};
    case Opcode::F32Sqrt: return UnaryFloatInfo{FloatUnOp::Sqrt, ValType::F32};
    case Opcode::F64Abs: return UnaryFloatInfo{FloatUnOp::Abs, ValType::F64};
    case Opcode::F64Neg: return UnaryFloatInfo{FloatUnOp::Neg, ValType::F64};
    case Opcode::F64Sqrt: return UnaryFloatInfo{FloatUnOp::Sqrt, ValType::F64};
    default: return std::nullopt;
  }
}

std::optional<ConversionInfo> conversion_info(Opcode op) {
  switch (op) {
    case Opcode::I32WrapI64: return ConversionInfo{Conversion::WrapI64, ValType::I64, ValType::I32};
    case Opcode::I64ExtendI32S: return ConversionInfo{Conversion::ExtendI32S, ValType::I32, ValType::I64};
    case Opcode::I64ExtendI32U: return ConversionInfo{Conversion::ExtendI32U, ValType::I32, ValType::I64};
    case Opcode::F64ConvertI32S: return ConversionInfo{Conversion::F64ConvertI32S, ValType::I32, ValType::F64};
    case Opcode::I32TruncF64S: return ConversionInfo{Conversion::I32TruncF64S, ValType::F64, ValType::I32};
    default: return std::nullopt;
  }
}

std::optional<MemAccessInfo> mem_access_info(Opcode op) {
  switch (op) {
    case Opcode::I32Load: return MemAccessInfo{MemKind::I32, ValType::I32, false, 4};
    case Opcode::I64Load: return MemAccessInfo{MemKind::I64, ValType::I64, false, 8};
    case Opcode::F32Load: return MemAccessInfo{MemKind::F32, ValType::F32, false, 4};
    case Opcode::F64Load: return MemAccessInfo{MemKind::F64, ValType::F64, false, 8};
    case Opcode::I32Load8U: return MemAccessInfo{MemKind::I32_8U, ValType::I32, false, 1};
    case Opcode::I32Store: return MemAccessInfo{MemKind::I32, ValType::I32, true, 4};
    case Opcode::I64Store: return MemAccessInfo{MemKind::I64, ValType::I64, true, 8};
    case Opcode::F32Store: return MemAccessInfo{MemKind::F32, ValType::F32, true, 4};
    case Opcode::F64Store: return MemAccessInfo{MemKind::F64, ValType::F64, true, 8};
    case Opcode::I32Store8: return MemAccessInfo{MemKind::I32_8U, ValType::I32, true, 1};
    default: return std::nullopt;
  }
}

}  // namespace spc::wasm
