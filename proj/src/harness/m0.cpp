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

#include "spc/harness/m0.h"

#include "spc/wasm/builder.h"
#include "spc/wasm/decoder.h"
#include "spc/wasm/validator.h"

namespace spc::harness {

using wasm::ValType;

std::vector<uint8_t> make_m0(std::span<const uint8_t> bytes) {
  wasm::WasmModule m = wasm::decode_module(bytes);
  wasm::validate(m);
  auto entry = m.entry_function();
  if (!entry) throw NoEntry("module exports no function");

  wasm::ModuleBuilder mb;
  std::vector<uint32_t> types;
  for (const auto& t : m.types) types.push_back(mb.add_type(t.params, t.result));
  for (uint32_t i = 0; i < m.num_imports(); i++) {
    const auto& im = m.imports[i];
    mb.import_func(im.module, im.name, types[im.type_index]);
  }
  for (const auto& g : m.globals) mb.add_global(g.type, g.mutable_, g.init);
  uint32_t opaque = mb.add_global(ValType::I32, true, wasm::TypedValue::i32(1));

  for (const wasm::WasmFunction& f : m.functions) {
    auto& fb = mb.add_function(types[f.type_index]);
    for (const auto& d : f.local_decls) fb.add_locals(d.count, d.type);
    auto& c = fb.code();
    if (f.index == *entry) {
      c.global_get(opaque).if_();
      if (auto r = m.func_type(f.index).result) c.const_of(wasm::TypedValue{*r, 0});
      c.return_().end();
    }
    auto body = m.body(f);
    c.raw(body.subspan(f.code_offset));
  }
  if (m.memory) mb.set_memory(m.memory->initial, m.memory->max);
  for (const auto& e : m.exports) {
    if (e.kind == wasm::ExportKind::Func)
      mb.export_func(e.name, e.index);
    else if (e.kind == wasm::ExportKind::Memory)
      mb.export_memory(e.name);
  }
  if (m.start) mb.set_start(*m.start);
  for (const auto& d : m.data) mb.add_data(d.offset, d.bytes);
  return mb.build();
}

}  // namespace spc::harness
