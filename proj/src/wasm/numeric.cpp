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

#include "spc/wasm/numeric.h"

#include <bit>
#include <cmath>
#include <limits>

namespace spc::wasm {

std::string_view trap_name(TrapKind k) {
  switch (k) {
    case TrapKind::None: return "none";
    case TrapKind::Unreachable: return "unreachable";
    case TrapKind::DivByZero: return "integer divide by zero";
    case TrapKind::IntegerOverflow: return "integer overflow";
    case TrapKind::OutOfBounds: return "out of bounds memory access";
    case TrapKind::TruncError: return "invalid conversion to integer";
    case TrapKind::StackOverflow: return "call stack exhausted";
    case TrapKind::ScanError: return "stack scan failed";
  }
  return "?";
}

std::string_view trap_kind_name(TrapKind k) {
  switch (k) {
    case TrapKind::None: return "None";
    case TrapKind::Unreachable: return "Unreachable";
    case TrapKind::DivByZero: return "DivByZero";
    case TrapKind::IntegerOverflow: return "IntegerOverflow";
    case TrapKind::OutOfBounds: return "OutOfBounds";
    case TrapKind::TruncError: return "TruncError";
    case TrapKind::StackOverflow: return "StackOverflow";
    case TrapKind::ScanError: return "ScanError";
  }
  return "?";
}

bool can_trap(IntOp op) {
  return op == IntOp::DivS || op == IntOp::DivU || op == IntOp::RemS || op == IntOp::RemU;
}

namespace {

template <typename S, typename U>
NumResult eval_typed(IntOp op, U a, U b) {
  constexpr unsigned kBits = sizeof(U) * 8;
  S sa = static_cast<S>(a);
  S sb = static_cast<S>(b);
  U r = 0;
  switch (op) {
    case IntOp::Add: r = static_cast<U>(a + b); break;
    case IntOp::Sub: r = static_cast<U>(a - b); break;
    case IntOp::Mul: r = static_cast<U>(a * b); break;
    case IntOp::DivS:
      if (b == 0) return {0, TrapKind::DivByZero};
      if (sa == std::numeric_limits<S>::min() && sb == -1) return {0, TrapKind::IntegerOverflow};
      r = static_cast<U>(sa / sb);
      break;
    case IntOp::DivU:
      if (b == 0) return {0, TrapKind::DivByZero};
      r = a / b;
      break;
    case IntOp::RemS:
      if (b == 0) return {0, TrapKind::DivByZero};
      r = (sb == -1) ? 0 : static_cast<U>(sa % sb);
      break;
    case IntOp::RemU:
      if (b == 0) return {0, TrapKind::DivByZero};
      r = a % b;
      break;
    case IntOp::And: r = a & b; break;
    case IntOp::Or: r = a | b; break;
    case IntOp::Xor: r = a ^ b; break;
    case IntOp::Shl: r = static_cast<U>(a << (b & (kBits - 1))); break;
    case IntOp::ShrS: r = static_cast<U>(sa >> (b & (kBits - 1))); break;
    case IntOp::ShrU: r = static_cast<U>(a >> (b & (kBits - 1))); break;
  }
  return {static_cast<uint64_t>(r), TrapKind::None};
}

template <typename F>
F apply(FloatOp op, F a, F b) {
  switch (op) {
    case FloatOp::Add: return a + b;
    case FloatOp::Sub: return a - b;
    case FloatOp::Mul: return a * b;
    case FloatOp::Div: return a / b;
  }
  return 0;
}

uint64_t canon32(float f) {
  return std::isnan(f) ? kCanonicalNaN32 : std::bit_cast<uint32_t>(f);
}

uint64_t canon64(double d) {
  return std::isnan(d) ? kCanonicalNaN64 : std::bit_cast<uint64_t>(d);
}

}  // namespace

NumResult eval_int(IntOp op, bool wide, uint64_t a, uint64_t b) {
  if (wide) return eval_typed<int64_t, uint64_t>(op, a, b);
  return eval_typed<int32_t, uint32_t>(op, static_cast<uint32_t>(a), static_cast<uint32_t>(b));
}

uint64_t eval_float(FloatOp op, bool wide, uint64_t a, uint64_t b) {
  if (wide) return canon64(apply(op, std::bit_cast<double>(a), std::bit_cast<double>(b)));
  return canon32(apply(op, std::bit_cast<float>(static_cast<uint32_t>(a)),
                       std::bit_cast<float>(static_cast<uint32_t>(b))));
}

// neg and abs are bit operations and do not canonicalize.
uint64_t eval_float_unary(FloatUnOp op, bool wide, uint64_t a) {
  if (wide) {
    switch (op) {
      case FloatUnOp::Neg: return a ^ 0x8000000000000000ull;
      case FloatUnOp::Abs: return a & 0x7fffffffffffffffull;
      case FloatUnOp::Sqrt: return canon64(std::sqrt(std::bit_cast<double>(a)));
    }
  }
  uint32_t v = static_cast<uint32_t>(a);
  switch (op) {
    case FloatUnOp::Neg: return v ^ 0x80000000u;
    case FloatUnOp::Abs: return v & 0x7fffffffu;
    case FloatUnOp::Sqrt: return canon32(std::sqrt(std::bit_cast<float>(v)));
  }
  return 0;
}

bool eval_cond(Cond c, bool wide, uint64_t a, uint64_t b) {
  if (c >= Cond::FEq) {
    double x, y;
    if (wide) {
      x = std::bit_cast<double>(a);
      y = std::bit_cast<double>(b);
    } else {
      x = std::bit_cast<float>(static_cast<uint32_t>(a));
      y = std::bit_cast<float>(static_cast<uint32_t>(b));
    }
    switch (c) {
      case Cond::FEq: return x == y;
      case Cond::FNe: return x != y;
      case Cond::FLt: return x < y;
      case Cond::FGt: return x > y;
      case Cond::FLe: return x <= y;
      case Cond::FGe: return x >= y;
      default: return false;
    }
  }
  uint64_t ua = wide ? a : static_cast<uint32_t>(a);
  uint64_t ub = wide ? b : static_cast<uint32_t>(b);
  int64_t sa = wide ? static_cast<int64_t>(a) : static_cast<int32_t>(static_cast<uint32_t>(a));
  int64_t sb = wide ? static_cast<int64_t>(b) : static_cast<int32_t>(static_cast<uint32_t>(b));
  switch (c) {
    case Cond::Eq: return ua == ub;
    case Cond::Ne: return ua != ub;
    case Cond::LtS: return sa < sb;
    case Cond::LtU: return ua < ub;
    case Cond::GtS: return sa > sb;
    case Cond::GtU: return ua > ub;
    case Cond::LeS: return sa <= sb;
    case Cond::LeU: return ua <= ub;
    case Cond::GeS: return sa >= sb;
    case Cond::GeU: return ua >= ub;
    default: return false;
  }
}

NumResult eval_conversion(Conversion c, uint64_t a) {
  switch (c) {
    case Conversion::WrapI64: return {a & 0xffffffffull};
    case Conversion::ExtendI32S:
      return {static_cast<uint64_t>(static_cast<int64_t>(static_cast<int32_t>(static_cast<uint32_t>(a))))};
    case Conversion::ExtendI32U: return {a & 0xffffffffull};
    case Conversion::F64ConvertI32S:
      return {std::bit_cast<uint64_t>(static_cast<double>(static_cast<int32_t>(static_cast<uint32_t>(a))))};
    case Conversion::I32TruncF64S: {
      double d = std::bit_cast<double>(a);
      if (std::isnan(d)) return {0, TrapKind::TruncError};
      double t = std::trunc(d);
      if (t < -2147483648.0 || t > 2147483647.0) return {0, TrapKind::TruncError};
      return {static_cast<uint32_t>(static_cast<int32_t>(t))};
    }
  }
  return {0};
}

}  // namespace spc::wasm
