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

#ifndef SPC_WASM_MODULE_H
#define SPC_WASM_MODULE_H

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spc/wasm/types.h"

namespace spc::wasm {

constexpr uint32_t kPageSize = 65536;
constexpr uint32_t kMaxPages = 65536;

struct SidetableEntry {
  uint32_t branch_pc = 0;
  uint32_t target_pc = 0;
  uint32_t val_count = 0;
  uint32_t pop_count = 0;
  uint32_t target_stp = 0;  // sidetable index in effect at target_pc

  bool operator==(const SidetableEntry&) const = default;
};

struct LocalDecl {
  uint32_t count = 0;
  ValType type = ValType::I32;
};

// Body-relative pcs: pc 0 is the first byte after the body size field.
struct WasmFunction {
  uint32_t index = 0;  // in the function index space (imports first)
  uint32_t type_index = 0;
  size_t body_offset = 0;
  uint32_t body_size = 0;
  bool validated = false;
  std::vector<LocalDecl> local_decls;
  uint32_t code_offset = 0;  // pc of the first instruction
  std::vector<SidetableEntry> sidetable;
  uint32_t max_stack_height = 0;
  uint32_t num_params = 0;
  uint32_t num_locals = 0;  // params + declared
  std::vector<ValType> local_types;  // params then declared, one per slot

  uint32_t frame_slots() const { return num_locals + max_stack_height; }
  // Sidetable position in effect when execution reaches pc.
  uint32_t stp_at(uint32_t pc) const;
};

struct Import {
  std::string module;
  std::string name;
  uint32_t type_index = 0;
};

struct Global {
  ValType type = ValType::I32;
  bool mutable_ = false;
  TypedValue init;
};

struct MemoryLimits {
  uint32_t initial = 0;
  std::optional<uint32_t> max;
};

enum class ExportKind : uint8_t { Func = 0, Memory = 2, Global = 3 };

struct Export {
  std::string name;
  ExportKind kind = ExportKind::Func;
  uint32_t index = 0;
};

struct DataSegment {
  uint32_t offset = 0;
  std::vector<uint8_t> bytes;
};

struct WasmModule {
  std::shared_ptr<const std::vector<uint8_t>> bytes;
  std::vector<FuncType> types;
  std::vector<Import> imports;
  std::vector<WasmFunction> functions;  // defined functions only
  std::vector<Global> globals;
  std::optional<MemoryLimits> memory;
  std::vector<Export> exports;
  std::optional<uint32_t> start;
  std::vector<DataSegment> data;
  std::vector<uint32_t> func_type_indices;  // whole function index space

  uint32_t num_imports() const { return static_cast<uint32_t>(imports.size()); }
  uint32_t num_functions() const { return static_cast<uint32_t>(func_type_indices.size()); }
  bool is_import(uint32_t func) const { return func < num_imports(); }
  const FuncType& func_type(uint32_t func) const { return types[func_type_indices[func]]; }
  WasmFunction& defined(uint32_t func) { return functions[func - num_imports()]; }
  const WasmFunction& defined(uint32_t func) const { return functions[func - num_imports()]; }
  std::span<const uint8_t> body(const WasmFunction& f) const {
    return std::span<const uint8_t>(*bytes).subspan(f.body_offset, f.body_size);
  }
  std::optional<uint32_t> find_export(std::string_view name, ExportKind kind) const;
  // First exported defined function, if any.
  std::optional<uint32_t> entry_function() const;
};

}  // namespace spc::wasm

#endif  // SPC_WASM_MODULE_H
