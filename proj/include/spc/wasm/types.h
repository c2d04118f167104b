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

#ifndef SPC_WASM_TYPES_H
#define SPC_WASM_TYPES_H

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spc::wasm {

// Binary encodings of the supported value types. Ref is externref.
enum class ValType : uint8_t {
  I32 = 0x7f,
  I64 = 0x7e,
  F32 = 0x7d,
  F64 = 0x7c,
  Ref = 0x6f,
};

// Tag bytes stored alongside every value-stack slot.
enum class Tag : uint8_t {
  Untagged = 0x00,
  I32 = 0x01,
  I64 = 0x02,
  F32 = 0x03,
  F64 = 0x04,
  Ref = 0x05,
};

constexpr Tag tag_of(ValType t) {
  switch (t) {
    case ValType::I32: return Tag::I32;
    case ValType::I64: return Tag::I64;
    case ValType::F32: return Tag::F32;
    case ValType::F64: return Tag::F64;
    case ValType::Ref: return Tag::Ref;
  }
  return Tag::Untagged;
}

constexpr bool is_float(ValType t) { return t == ValType::F32 || t == ValType::F64; }

// Values narrower than 64 bits live zero-extended in registers and slots.
constexpr bool is_narrow(ValType t) { return t == ValType::I32 || t == ValType::F32; }

std::optional<ValType> valtype_from_byte(uint8_t b);
std::string_view valtype_name(ValType t);
std::string_view tag_name(Tag t);

// Default (zero) value bits for every supported type; the null ref is 0.
constexpr uint64_t kNullRef = 0;

struct FuncType {
  std::vector<ValType> params;
  std::optional<ValType> result;

  bool operator==(const FuncType&) const = default;
};

// A value with its static type, used at host and API boundaries.
struct TypedValue {
  ValType type = ValType::I32;
  uint64_t bits = 0;

  static TypedValue i32(int32_t v) { return {ValType::I32, static_cast<uint32_t>(v)}; }
  static TypedValue i64(int64_t v) { return {ValType::I64, static_cast<uint64_t>(v)}; }
  static TypedValue f32(float v);
  static TypedValue f64(double v);
  static TypedValue ref(uint64_t handle) { return {ValType::Ref, handle}; }

  int32_t as_i32() const { return static_cast<int32_t>(static_cast<uint32_t>(bits)); }
  int64_t as_i64() const { return static_cast<int64_t>(bits); }
  float as_f32() const;
  double as_f64() const;

  bool operator==(const TypedValue&) const = default;
};

std::string to_string(const TypedValue& v);

}  // namespace spc::wasm

#endif  // SPC_WASM_TYPES_H
