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

#include "spc/wasm/types.h"

#include <bit>
#include <cstdio>

namespace spc::wasm {

std::optional<ValType> valtype_from_byte(uint8_t b) {
  switch (b) {
    case 0x7f: return ValType::I32;
    case 0x7e: return ValType::I64;
    case 0x7d: return ValType::F32;
    case 0x7c: return ValType::F64;
    case 0x6f: return ValType::Ref;
    default: return std::nullopt;
  }
}

std::string_view valtype_name(ValType t) {
  switch (t) {
    case ValType::I32: return "i32";
    case ValType::I64: return "i64";
    case ValType::F32: return "f32";
    case ValType::F64: return "f64";
    case ValType::Ref: return "externref";
  }
  return "?";
}

std::string_view tag_name(Tag t) {
  switch (t) {
    case Tag::Untagged: return "untagged";
    case Tag::I32: return "i32";
    case Tag::I64: return "i64";
    case Tag::F32: return "f32";
    case Tag::F64: return "f64";
    case Tag::Ref: return "ref";
  }
  return "?";
}

TypedValue TypedValue::f32(float v) { return {ValType::F32, std::bit_cast<uint32_t>(v)}; }
TypedValue TypedValue::f64(double v) { return {ValType::F64, std::bit_cast<uint64_t>(v)}; }
float TypedValue::as_f32() const { return std::bit_cast<float>(static_cast<uint32_t>(bits)); }
double TypedValue::as_f64() const { return std::bit_cast<double>(bits); }

std::string to_string(const TypedValue& v) {
  char buf[64];
  switch (v.type) {
    case ValType::I32: std::snprintf(buf, sizeof buf, "i32:%d", v.as_i32()); break;
    case ValType::I64: std::snprintf(buf, sizeof buf, "i64:%lld", static_cast<long long>(v.as_i64())); break;
    case ValType::F32: std::snprintf(buf, sizeof buf, "f32:%.9g", static_cast<double>(v.as_f32())); break;
    case ValType::F64: std::snprintf(buf, sizeof buf, "f64:%.17g", v.as_f64()); break;
    case ValType::Ref:
      if (v.bits == kNullRef)
        std::snprintf(buf, sizeof buf, "ref:null");
      else
        std::snprintf(buf, sizeof buf, "ref:%llu", static_cast<unsigned long long>(v.bits));
      break;
  }
  return buf;
}

}  // namespace spc::wasm
