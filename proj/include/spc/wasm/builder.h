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

#ifndef SPC_WASM_BUILDER_H
#define SPC_WASM_BUILDER_H

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spc/wasm/cursor.h"
#include "spc/wasm/module.h"
#include "spc/wasm/opcodes.h"
#include "spc/wasm/types.h"

namespace spc::wasm {

// Emits instruction bytes for one function body.
class CodeBuilder {
 public:
  CodeBuilder& op(Opcode o) {
    w_.u8(static_cast<uint8_t>(o));
    return *this;
  }
  CodeBuilder& raw(std::span<const uint8_t> b) {
    w_.bytes(b);
    return *this;
  }
  CodeBuilder& u32(uint32_t v) {
    w_.u32_leb(v);
    return *this;
  }

  CodeBuilder& unreachable() { return op(Opcode::Unreachable); }
  CodeBuilder& nop() { return op(Opcode::Nop); }
  CodeBuilder& block(std::optional<ValType> result = std::nullopt) { return op(Opcode::Block).block_type(result); }
  CodeBuilder& loop(std::optional<ValType> result = std::nullopt) { return op(Opcode::Loop).block_type(result); }
  CodeBuilder& if_(std::optional<ValType> result = std::nullopt) { return op(Opcode::If).block_type(result); }
  CodeBuilder& else_() { return op(Opcode::Else); }
  CodeBuilder& end() { return op(Opcode::End); }
  CodeBuilder& br(uint32_t depth) { return op(Opcode::Br).u32(depth); }
  CodeBuilder& br_if(uint32_t depth) { return op(Opcode::BrIf).u32(depth); }
  CodeBuilder& br_table(const std::vector<uint32_t>& depths, uint32_t default_depth);
  CodeBuilder& return_() { return op(Opcode::Return); }
  CodeBuilder& call(uint32_t func) { return op(Opcode::Call).u32(func); }
  CodeBuilder& drop() { return op(Opcode::Drop); }
  CodeBuilder& select() { return op(Opcode::Select); }
  CodeBuilder& select_t(ValType t) {
    op(Opcode::SelectT).u32(1);
    w_.u8(static_cast<uint8_t>(t));
    return *this;
  }
  CodeBuilder& local_get(uint32_t i) { return op(Opcode::LocalGet).u32(i); }
  CodeBuilder& local_set(uint32_t i) { return op(Opcode::LocalSet).u32(i); }
  CodeBuilder& local_tee(uint32_t i) { return op(Opcode::LocalTee).u32(i); }
  CodeBuilder& global_get(uint32_t i) { return op(Opcode::GlobalGet).u32(i); }
  CodeBuilder& global_set(uint32_t i) { return op(Opcode::GlobalSet).u32(i); }
  CodeBuilder& mem(Opcode o, uint32_t offset = 0);
  CodeBuilder& memory_size() {
    op(Opcode::MemorySize);
    w_.u8(0);
    return *this;
  }
  CodeBuilder& memory_grow() {
    op(Opcode::MemoryGrow);
    w_.u8(0);
    return *this;
  }
  CodeBuilder& i32_const(int32_t v) {
    op(Opcode::I32Const);
    w_.i32_leb(v);
    return *this;
  }
  CodeBuilder& i64_const(int64_t v) {
    op(Opcode::I64Const);
    w_.i64_leb(v);
    return *this;
  }
  CodeBuilder& f32_const(float v);
  CodeBuilder& f64_const(double v);
  CodeBuilder& f32_bits(uint32_t bits) {
    op(Opcode::F32Const);
    w_.fixed32(bits);
    return *this;
  }
  CodeBuilder& f64_bits(uint64_t bits) {
    op(Opcode::F64Const);
    w_.fixed64(bits);
    return *this;
  }
  CodeBuilder& const_of(const TypedValue& v);
  CodeBuilder& ref_null() {
    op(Opcode::RefNull);
    w_.u8(0x6f);
    return *this;
  }
  CodeBuilder& ref_is_null() { return op(Opcode::RefIsNull); }

  const std::vector<uint8_t>& bytes() const { return w_.out(); }
  size_t size() const { return w_.size(); }

 private:
  CodeBuilder& block_type(std::optional<ValType> t) {
    w_.u8(t ? static_cast<uint8_t>(*t) : 0x40);
    return *this;
  }

  ByteWriter w_;
};

class FunctionBuilder {
 public:
  FunctionBuilder(uint32_t index, uint32_t type_index) : index_(index), type_index_(type_index) {}

  uint32_t index() const { return index_; }
  uint32_t type_index() const { return type_index_; }
  // Returns the local index of the first added local.
  uint32_t add_locals(uint32_t count, ValType t);
  CodeBuilder& code() { return code_; }
  void set_num_params(uint32_t n) { num_params_ = n; }
  std::vector<uint8_t> encode_body() const;

 private:
  uint32_t index_;
  uint32_t type_index_;
  uint32_t num_params_ = 0;
  uint32_t num_declared_ = 0;
  std::vector<LocalDecl> locals_;
  CodeBuilder code_;
};

// Assembles a binary module. Imports must be declared before any function.
class ModuleBuilder {
 public:
  uint32_t add_type(std::vector<ValType> params, std::optional<ValType> result);
  uint32_t import_func(std::string module, std::string name, uint32_t type_index);
  FunctionBuilder& add_function(uint32_t type_index);
  FunctionBuilder& function(uint32_t func_index);
  uint32_t add_global(ValType t, bool mutable_, TypedValue init);
  void set_memory(uint32_t initial, std::optional<uint32_t> max = std::nullopt);
  void export_func(std::string name, uint32_t func_index);
  void export_memory(std::string name);
  void set_start(uint32_t func_index);
  void add_data(uint32_t offset, std::vector<uint8_t> bytes);
  void add_custom(std::string name, std::vector<uint8_t> payload);

  uint32_t num_functions() const { return static_cast<uint32_t>(imports_.size() + functions_.size()); }
  const FuncType& type(uint32_t index) const { return types_.at(index); }

  std::vector<uint8_t> build() const;

 private:
  struct ImportEntry {
    std::string module;
    std::string name;
    uint32_t type_index;
  };
  struct GlobalEntry {
    ValType type;
    bool mutable_;
    TypedValue init;
  };

  std::vector<FuncType> types_;
  std::vector<ImportEntry> imports_;
  std::vector<std::unique_ptr<FunctionBuilder>> functions_;
  std::vector<GlobalEntry> globals_;
  std::optional<MemoryLimits> memory_;
  std::vector<Export> exports_;
  std::optional<uint32_t> start_;
  std::vector<DataSegment> data_;
  std::vector<std::pair<std::string, std::vector<uint8_t>>> customs_;
};

// Encodes a constant initializer expression (including the end opcode).
void write_const_expr(ByteWriter& w, const TypedValue& v);

}  // namespace spc::wasm

#endif  // SPC_WASM_BUILDER_H
