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

#include "spc/wasm/decoder.h"

#include <algorithm>

#include "spc/wasm/cursor.h"
#include "spc/wasm/errors.h"
#include "spc/wasm/opcodes.h"

namespace spc::wasm {

uint32_t WasmFunction::stp_at(uint32_t pc) const {
  auto it = std::lower_bound(sidetable.begin(), sidetable.end(), pc,
                             [](const SidetableEntry& e, uint32_t p) { return e.branch_pc < p; });
  return static_cast<uint32_t>(it - sidetable.begin());
}

std::optional<uint32_t> WasmModule::find_export(std::string_view name, ExportKind kind) const {
  for (const auto& e : exports)
    if (e.kind == kind && e.name == name) return e.index;
  return std::nullopt;
}

std::optional<uint32_t> WasmModule::entry_function() const {
  if (auto s = find_export("_start", ExportKind::Func); s && !is_import(*s)) return s;
  if (auto s = find_export("main", ExportKind::Func); s && !is_import(*s)) return s;
  for (const auto& e : exports)
    if (e.kind == ExportKind::Func && !is_import(e.index)) return e.index;
  return std::nullopt;
}

namespace {

class Decoder {
 public:
  explicit Decoder(std::shared_ptr<const std::vector<uint8_t>> bytes) : bytes_(std::move(bytes)) {
    module_.bytes = bytes_;
  }

  WasmModule run() {
    Cursor c(*bytes_);
    if (bytes_->size() < 4) throw MalformedModule(0, "missing magic");
    if (c.fixed32() != 0x6d736100u) throw MalformedModule(0, "bad magic");
    if (c.remaining() < 4) throw MalformedModule(4, "missing version");
    if (c.fixed32() != 1) throw MalformedModule(4, "unsupported version");

    uint8_t last_id = 0;
    uint32_t declared_funcs = 0;
    bool saw_function_section = false;
    bool saw_code_section = false;
    while (!c.at_end()) {
      size_t section_start = c.pos();
      uint8_t id = c.u8();
      uint32_t size = c.u32_leb();
      if (size > c.remaining()) throw MalformedModule(section_start, "section size out of bounds");
      size_t end = c.pos() + size;
      if (id != 0) {
        if (id <= last_id) throw MalformedModule(section_start, "section out of order");
        last_id = id;
      }
      Cursor s(*bytes_, c.pos(), end);
      switch (id) {
        case 0: s.name(); break;  // custom sections are skipped
        case 1: types(s); break;
        case 2: imports(s); break;
        case 3:
          declared_funcs = functions(s);
          saw_function_section = true;
          break;
        case 5: memory(s); break;
        case 6: globals(s); break;
        case 7: exports(s); break;
        case 8: start(s); break;
        case 10:
          code(s, declared_funcs);
          saw_code_section = true;
          break;
        case 11: data(s); break;
        case 12: s.u32_leb(); break;
        default: throw MalformedModule(section_start, "unsupported section " + std::to_string(id));
      }
      if (id != 0 && s.pos() != end) throw MalformedModule(s.pos(), "section size mismatch");
      c.skip(end - c.pos());
    }
    if (saw_function_section && declared_funcs > 0 && !saw_code_section)
      throw MalformedModule(bytes_->size(), "function and code section have inconsistent lengths");
    return std::move(module_);
  }

 private:
  ValType valtype(Cursor& c) {
    size_t at = c.pos();
    auto t = valtype_from_byte(c.u8());
    if (!t) throw MalformedModule(at, "invalid value type");
    return *t;
  }

  void types(Cursor& c) {
    uint32_t n = c.u32_leb();
    for (uint32_t i = 0; i < n; i++) {
      size_t at = c.pos();
      if (c.u8() != 0x60) throw MalformedModule(at, "expected func type");
      FuncType ft;
      uint32_t np = c.u32_leb();
      for (uint32_t j = 0; j < np; j++) ft.params.push_back(valtype(c));
      uint32_t nr = c.u32_leb();
      if (nr > 1) throw MalformedModule(c.pos(), "multiple results unsupported");
      if (nr == 1) ft.result = valtype(c);
      module_.types.push_back(std::move(ft));
    }
  }

  uint32_t type_index(Cursor& c) {
    size_t at = c.pos();
    uint32_t t = c.u32_leb();
    if (t >= module_.types.size()) throw MalformedModule(at, "type index out of bounds");
    return t;
  }

  void imports(Cursor& c) {
    uint32_t n = c.u32_leb();
    for (uint32_t i = 0; i < n; i++) {
      Import imp;
      imp.module = c.name();
      imp.name = c.name();
      size_t at = c.pos();
      uint8_t kind = c.u8();
      if (kind != 0) throw MalformedModule(at, "only function imports are supported");
      imp.type_index = type_index(c);
      module_.func_type_indices.push_back(imp.type_index);
      module_.imports.push_back(std::move(imp));
    }
  }

  uint32_t functions(Cursor& c) {
    uint32_t n = c.u32_leb();
    for (uint32_t i = 0; i < n; i++) {
      WasmFunction f;
      f.type_index = type_index(c);
      f.index = static_cast<uint32_t>(module_.func_type_indices.size());
      module_.func_type_indices.push_back(f.type_index);
      module_.functions.push_back(std::move(f));
    }
    return n;
  }

  MemoryLimits limits(Cursor& c) {
    size_t at = c.pos();
    uint8_t flag = c.u8();
    if (flag > 1) throw MalformedModule(at, "invalid limits flag");
    MemoryLimits l;
    l.initial = c.u32_leb();
    if (flag == 1) l.max = c.u32_leb();
    if (l.initial > kMaxPages || (l.max && (*l.max > kMaxPages || *l.max < l.initial)))
      throw MalformedModule(at, "invalid memory limits");
    return l;
  }

  void memory(Cursor& c) {
    size_t at = c.pos();
    uint32_t n = c.u32_leb();
    if (n > 1) throw MalformedModule(at, "multiple memories");
    if (n == 1) module_.memory = limits(c);
  }

  TypedValue const_expr(Cursor& c, ValType expect) {
    size_t at = c.pos();
    uint8_t op = c.u8();
    TypedValue v;
    switch (op) {
      case 0x41: v = TypedValue::i32(c.i32_leb()); break;
      case 0x42: v = TypedValue::i64(c.i64_leb()); break;
      case 0x43: v = {ValType::F32, c.fixed32()}; break;
      case 0x44: v = {ValType::F64, c.fixed64()}; break;
      case 0xd0:
        if (c.u8() != 0x6f) throw MalformedModule(at, "invalid ref type");
        v = TypedValue::ref(kNullRef);
        break;
      default: throw MalformedModule(at, "unsupported constant expression");
    }
    if (c.u8() != 0x0b) throw MalformedModule(c.pos() - 1, "expected end of constant expression");
    if (v.type != expect) throw MalformedModule(at, "constant expression type mismatch");
    return v;
  }

  void globals(Cursor& c) {
    uint32_t n = c.u32_leb();
    for (uint32_t i = 0; i < n; i++) {
      Global g;
      g.type = valtype(c);
      size_t at = c.pos();
      uint8_t m = c.u8();
      if (m > 1) throw MalformedModule(at, "invalid mutability");
      g.mutable_ = m == 1;
      g.init = const_expr(c, g.type);
      module_.globals.push_back(g);
    }
  }

  void exports(Cursor& c) {
    uint32_t n = c.u32_leb();
    for (uint32_t i = 0; i < n; i++) {
      Export e;
      e.name = c.name();
      size_t at = c.pos();
      uint8_t kind = c.u8();
      e.index = c.u32_leb();
      switch (kind) {
        case 0:
          if (e.index >= module_.func_type_indices.size()) throw MalformedModule(at, "function index out of bounds");
          e.kind = ExportKind::Func;
          break;
        case 2:
          if (!module_.memory || e.index != 0) throw MalformedModule(at, "memory index out of bounds");
          e.kind = ExportKind::Memory;
          break;
        case 3:
          if (e.index >= module_.globals.size()) throw MalformedModule(at, "global index out of bounds");
          e.kind = ExportKind::Global;
          break;
        default: throw MalformedModule(at, "unsupported export kind");
      }
      for (const auto& other : module_.exports)
        if (other.name == e.name) throw MalformedModule(at, "duplicate export name");
      module_.exports.push_back(std::move(e));
    }
  }

  void start(Cursor& c) {
    size_t at = c.pos();
    uint32_t f = c.u32_leb();
    if (f >= module_.func_type_indices.size()) throw MalformedModule(at, "start function index out of bounds");
    const FuncType& t = module_.types[module_.func_type_indices[f]];
    if (!t.params.empty() || t.result) throw MalformedModule(at, "start function must be [] -> []");
    module_.start = f;
  }

  void code(Cursor& c, uint32_t declared) {
    size_t at = c.pos();
    uint32_t n = c.u32_leb();
    if (n != declared) throw MalformedModule(at, "function and code section have inconsistent lengths");
    for (uint32_t i = 0; i < n; i++) {
      uint32_t size = c.u32_leb();
      if (size == 0 || size > c.remaining()) throw MalformedModule(c.pos(), "invalid function body size");
      WasmFunction& f = module_.functions[i];
      f.body_offset = c.pos();
      f.body_size = size;
      c.skip(size);
    }
  }

  void data(Cursor& c) {
    uint32_t n = c.u32_leb();
    for (uint32_t i = 0; i < n; i++) {
      size_t at = c.pos();
      uint32_t kind = c.u32_leb();
      if (kind != 0) throw MalformedModule(at, "only active data segments for memory 0 are supported");
      if (!module_.memory) throw MalformedModule(at, "data segment without memory");
      DataSegment seg;
      seg.offset = static_cast<uint32_t>(const_expr(c, ValType::I32).bits);
      uint32_t len = c.u32_leb();
      auto b = c.bytes(len);
      seg.bytes.assign(b.begin(), b.end());
      module_.data.push_back(std::move(seg));
    }
  }

  std::shared_ptr<const std::vector<uint8_t>> bytes_;
  WasmModule module_;
};

}  // namespace

WasmModule decode_module(std::span<const uint8_t> bytes) {
  return decode_module(std::vector<uint8_t>(bytes.begin(), bytes.end()));
}

WasmModule decode_module(std::vector<uint8_t> bytes) {
  if (bytes.empty()) throw MalformedModule(0, "empty module");
  return Decoder(std::make_shared<const std::vector<uint8_t>>(std::move(bytes))).run();
}

}  // namespace spc::wasm
