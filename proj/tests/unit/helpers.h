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

#ifndef SPC_TESTS_HELPERS_H
#define SPC_TESTS_HELPERS_H

#include <algorithm>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "spc/compiler/compiler.h"
#include "spc/runtime/machine.h"
#include "spc/wasm/builder.h"
#include "spc/wasm/decoder.h"
#include "spc/wasm/validator.h"

namespace spc::test {

using wasm::CodeBuilder;
using wasm::Opcode;
using wasm::TypedValue;
using wasm::ValType;

inline constexpr ValType I32 = ValType::I32;
inline constexpr ValType I64 = ValType::I64;
inline constexpr ValType F32 = ValType::F32;
inline constexpr ValType F64 = ValType::F64;
inline constexpr ValType REF = ValType::Ref;

// Host import indices when a module is built with_host.
inline constexpr uint32_t kGcScan = 0, kMakeRef = 1, kRefId = 2, kPrint = 3;

struct FuncSpec {
  std::vector<ValType> params;
  std::optional<ValType> result;
  std::vector<ValType> locals;
  std::function<void(CodeBuilder&)> body;  // without the final end
};

// Functions are numbered after the host imports (if any); the last one is
// exported as main.
inline std::vector<uint8_t> module_of(const std::vector<FuncSpec>& fns, bool with_host = false,
                                      uint32_t pages = 0) {
  wasm::ModuleBuilder mb;
  if (with_host) {
    mb.import_func("host", "gc_scan", mb.add_type({}, std::nullopt));
    mb.import_func("host", "make_ref", mb.add_type({I32}, REF));
    mb.import_func("host", "ref_id", mb.add_type({REF}, I32));
    mb.import_func("host", "print", mb.add_type({I64}, std::nullopt));
  }
  if (pages) mb.set_memory(pages, pages + 1);
  uint32_t last = 0;
  for (const FuncSpec& f : fns) {
    auto& fb = mb.add_function(mb.add_type(f.params, f.result));
    for (ValType t : f.locals) fb.add_locals(1, t);
    f.body(fb.code());
    fb.code().end();
    last = fb.index();
  }
  mb.export_func("main", last);
  return mb.build();
}

inline std::vector<uint8_t> single(std::vector<ValType> params, std::optional<ValType> result,
                                   std::vector<ValType> locals, std::function<void(CodeBuilder&)> body,
                                   bool with_host = false, uint32_t pages = 0) {
  return module_of({{std::move(params), result, std::move(locals), std::move(body)}}, with_host, pages);
}

inline wasm::WasmModule load(const std::vector<uint8_t>& bytes) {
  wasm::WasmModule m = wasm::decode_module(bytes);
  wasm::validate(m);
  return m;
}

// A decoded module together with a machine running it.
struct Instance {
  wasm::WasmModule module;
  std::unique_ptr<runtime::Machine> machine;

  Instance(const std::vector<uint8_t>& bytes, runtime::MachineOptions opts)
      : module(load(bytes)), machine(std::make_unique<runtime::Machine>(module, std::move(opts))) {}
  runtime::Machine* operator->() { return machine.get(); }
  runtime::Outcome run(std::vector<TypedValue> args = {}) { return machine->run_main(args); }
};

inline runtime::MachineOptions opts_for(runtime::Mode mode, compiler::CompilerConfig cfg = {}) {
  runtime::MachineOptions o;
  o.mode = mode;
  o.config = cfg;
  return o;
}

inline runtime::Outcome run(const std::vector<uint8_t>& bytes, runtime::Mode mode,
                            compiler::CompilerConfig cfg = {}, std::vector<TypedValue> args = {}) {
  Instance inst(bytes, opts_for(mode, cfg));
  return inst.run(std::move(args));
}

inline compiler::CompiledFunction compile_last(const std::vector<uint8_t>& bytes, compiler::CompilerConfig cfg) {
  wasm::WasmModule m = load(bytes);
  return compiler::compile_function(m, m.num_functions() - 1, cfg);
}

inline size_t count_ops(const compiler::CompiledFunction& cf, visa::VOp op) {
  return static_cast<size_t>(std::count_if(cf.code.instrs().begin(), cf.code.instrs().end(),
                                           [&](const visa::Instr& i) { return i.op == op; }));
}

inline compiler::CompilerConfig with_tagging(compiler::CompilerConfig c, compiler::Tagging t) {
  c.tagging = t;
  return c;
}

}  // namespace spc::test

#endif  // SPC_TESTS_HELPERS_H
