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

#include "spc/wasm/builder.h"

#include <bit>

#include "spc/wasm/errors.h"

namespace spc::wasm {

CodeBuilder& CodeBuilder::br_table(const std::vector<uint32_t>& depths, uint32_t default_depth) {
  op(Opcode::BrTable).u32(static_cast<uint32_t>(depths.size()));
  for (uint32_t d : depths) u32(d);
  return u32(default_depth);
}

CodeBuilder& CodeBuilder::mem(Opcode o, uint32_t offset) {
  auto info = mem_access_info(o);
  if (!info) throw BuilderError("not a memory access opcode");
  op(o);
  w_.u32_leb(static_cast<uint32_t>(std::countr_zero(info->width)));
  w_.u32_leb(offset);
  return *this;
}

CodeBuilder& CodeBuilder::f32_const(float v) { return f32_bits(std::bit_cast<uint32_t>(v)); }
CodeBuilder& CodeBuilder::f64_const(double v) { return f64_bits(std::bit_cast<uint64_t>(v)); }

CodeBuilder& CodeBuilder::const_of(const TypedValue& v) {
  switch (v.type) {
    case ValType::I32: return i32_const(v.as_i32());
    case ValType::I64: return i64_const(v.as_i64());
    case ValType::F32: return f32_bits(static_cast<uint32_t>(v.bits));
    case ValType::F64: return f64_bits(v.bits);
    case ValType::Ref:
      if (v.bits != kNullRef) throw BuilderError("only null references can be constants");
      return ref_null();
  }
  return *this;
}

uint32_t FunctionBuilder::add_locals(uint32_t count, ValType t) {
  uint32_t first = num_params_ + num_declared_;
  if (count == 0) return first;
  if (!locals_.empty() && locals_.back().type == t)
    locals_.back().count += count;
  else
    locals_.push_back({count, t});
  num_declared_ += count;
  return first;
}

std::vector<uint8_t> FunctionBuilder::encode_body() const {
  ByteWriter w;
  w.u32_leb(static_cast<uint32_t>(locals_.size()));
  for (const auto& d : locals_) {
    w.u32_leb(d.count);
    w.u8(static_cast<uint8_t>(d.type));
  }
  w.bytes(code_.bytes());
  return std::move(w.out());
}

uint32_t ModuleBuilder::add_type(std::vector<ValType> params, std::optional<ValType> result) {
  FuncType t{std::move(params), result};
  for (uint32_t i = 0; i < types_.size(); i++)
    if (types_[i] == t) return i;
  types_.push_back(std::move(t));
  return static_cast<uint32_t>(types_.size() - 1);
}

uint32_t ModuleBuilder::import_func(std::string module, std::string name, uint32_t type_index) {
  if (!functions_.empty()) throw BuilderError("imports must be declared before functions");
  if (type_index >= types_.size()) throw BuilderError("import type index out of range");
  imports_.push_back({std::move(module), std::move(name), type_index});
  return static_cast<uint32_t>(imports_.size() - 1);
}

FunctionBuilder& ModuleBuilder::add_function(uint32_t type_index) {
  if (type_index >= types_.size()) throw BuilderError("function type index out of range");
  functions_.push_back(std::make_unique<FunctionBuilder>(num_functions(), type_index));
  functions_.back()->set_num_params(static_cast<uint32_t>(types_[type_index].params.size()));
  return *functions_.back();
}

FunctionBuilder& ModuleBuilder::function(uint32_t func_index) {
  if (func_index < imports_.size() || func_index >= num_functions())
    throw BuilderError("not a defined function index");
  return *functions_[func_index - imports_.size()];
}

uint32_t ModuleBuilder::add_global(ValType t, bool mutable_, TypedValue init) {
  if (init.type != t) throw BuilderError("global initializer type mismatch");
  globals_.push_back({t, mutable_, init});
  return static_cast<uint32_t>(globals_.size() - 1);
}

void ModuleBuilder::set_memory(uint32_t initial, std::optional<uint32_t> max) {
  if (max && *max < initial) throw BuilderError("memory maximum below initial size");
  memory_ = MemoryLimits{initial, max};
}

void ModuleBuilder::export_func(std::string name, uint32_t func_index) {
  if (func_index >= num_functions()) throw BuilderError("exported function index out of range");
  exports_.push_back({std::move(name), ExportKind::Func, func_index});
}

void ModuleBuilder::export_memory(std::string name) {
  if (!memory_) throw BuilderError("exporting memory without a memory");
  exports_.push_back({std::move(name), ExportKind::Memory, 0});
}

void ModuleBuilder::set_start(uint32_t func_index) {
  if (func_index >= num_functions()) throw BuilderError("start function index out of range");
  const FuncType& t = types_[func_index < imports_.size() ? imports_[func_index].type_index
                                                          : functions_[func_index - imports_.size()]->type_index()];
  if (!t.params.empty() || t.result) throw BuilderError("start function must take and return nothing");
  start_ = func_index;
}

void ModuleBuilder::add_data(uint32_t offset, std::vector<uint8_t> bytes) {
  if (!memory_) throw BuilderError("data segment without memory");
  data_.push_back({offset, std::move(bytes)});
}

void ModuleBuilder::add_custom(std::string name, std::vector<uint8_t> payload) {
  customs_.emplace_back(std::move(name), std::move(payload));
}

void write_const_expr(ByteWriter& w, const TypedValue& v) {
  switch (v.type) {
    case ValType::I32: w.u8(0x41); w.i32_leb(v.as_i32()); break;
    case ValType::I64: w.u8(0x42); w.i64_leb(v.as_i64()); break;
    case ValType::F32: w.u8(0x43); w.fixed32(static_cast<uint32_t>(v.bits)); break;
    case ValType::F64: w.u8(0x44); w.fixed64(v.bits); break;
    case ValType::Ref: w.u8(0xd0); w.u8(0x6f); break;
  }
  w.u8(0x0b);
}

namespace {

void section(ByteWriter& out, uint8_t id, const ByteWriter& payload) {
  out.u8(id);
  out.u32_leb(static_cast<uint32_t>(payload.size()));
  out.bytes(payload.out());
}

}  // namespace

std::vector<uint8_t> ModuleBuilder::build() const {
  ByteWriter out;
  out.fixed32(0x6d736100u);
  out.fixed32(1);

  if (!types_.empty()) {
    ByteWriter s;
    s.u32_leb(static_cast<uint32_t>(types_.size()));
    for (const auto& t : types_) {
      s.u8(0x60);
      s.u32_leb(static_cast<uint32_t>(t.params.size()));
      for (ValType p : t.params) s.u8(static_cast<uint8_t>(p));
      s.u32_leb(t.result ? 1 : 0);
      if (t.result) s.u8(static_cast<uint8_t>(*t.result));
    }
    section(out, 1, s);
  }
  if (!imports_.empty()) {
    ByteWriter s;
    s.u32_leb(static_cast<uint32_t>(imports_.size()));
    for (const auto& imp : imports_) {
      s.name(imp.module);
      s.name(imp.name);
      s.u8(0);
      s.u32_leb(imp.type_index);
    }
    section(out, 2, s);
  }
  if (!functions_.empty()) {
    ByteWriter s;
    s.u32_leb(static_cast<uint32_t>(functions_.size()));
    for (const auto& f : functions_) s.u32_leb(f->type_index());
    section(out, 3, s);
  }
  if (memory_) {
    ByteWriter s;
    s.u32_leb(1);
    s.u8(memory_->max ? 1 : 0);
    s.u32_leb(memory_->initial);
    if (memory_->max) s.u32_leb(*memory_->max);
    section(out, 5, s);
  }
  if (!globals_.empty()) {
    ByteWriter s;
    s.u32_leb(static_cast<uint32_t>(globals_.size()));
    for (const auto& g : globals_) {
      s.u8(static_cast<uint8_t>(g.type));
      s.u8(g.mutable_ ? 1 : 0);
      write_const_expr(s, g.init);
    }
    section(out, 6, s);
  }
  if (!exports_.empty()) {
    ByteWriter s;
    s.u32_leb(static_cast<uint32_t>(exports_.size()));
    for (const auto& e : exports_) {
      s.name(e.name);
      s.u8(static_cast<uint8_t>(e.kind));
      s.u32_leb(e.index);
    }
    section(out, 7, s);
  }
  if (start_) {
    ByteWriter s;
    s.u32_leb(*start_);
    section(out, 8, s);
  }
  if (!functions_.empty()) {
    ByteWriter s;
    s.u32_leb(static_cast<uint32_t>(functions_.size()));
    for (const auto& f : functions_) {
      auto body = f->encode_body();
      s.u32_leb(static_cast<uint32_t>(body.size()));
      s.bytes(body);
    }
    section(out, 10, s);
  }
  if (!data_.empty()) {
    ByteWriter s;
    s.u32_leb(static_cast<uint32_t>(data_.size()));
    for (const auto& d : data_) {
      s.u32_leb(0);
      write_const_expr(s, TypedValue::i32(static_cast<int32_t>(d.offset)));
      s.u32_leb(static_cast<uint32_t>(d.bytes.size()));
      s.bytes(d.bytes);
    }
    section(out, 11, s);
  }
  for (const auto& [name, payload] : customs_) {
    ByteWriter s;
    s.name(name);
    s.bytes(payload);
    section(out, 0, s);
  }
  return std::move(out.out());
}

}  // namespace spc::wasm
