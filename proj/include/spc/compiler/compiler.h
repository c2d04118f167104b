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

#ifndef SPC_COMPILER_COMPILER_H
#define SPC_COMPILER_COMPILER_H

#include <cstdint>
#include <optional>
#include <vector>

#include "spc/compiler/config.h"
#include "spc/visa/code_buffer.h"
#include "spc/wasm/cursor.h"
#include "spc/wasm/module.h"

namespace spc::compiler {

struct StaticMetrics {
  uint64_t code_bytes_in = 0;
  uint64_t code_bytes_out = 0;
  uint64_t instrs_emitted = 0;
  uint64_t moves_emitted = 0;
  uint64_t spills_emitted = 0;
  uint64_t tag_stores_emitted = 0;
  uint64_t compile_ns = 0;

  StaticMetrics& operator+=(const StaticMetrics& o);
};

StaticMetrics count_static(const visa::CodeBuffer& code);

struct LoopHeader {
  uint32_t wasm_pc = 0;  // pc of the loop opcode
  uint32_t vpc = 0;      // header position in the code
  uint32_t height = 0;   // frame slots live at the header
};

struct CompiledFunction {
  uint32_t func = 0;
  CompilerConfig config;
  visa::CodeBuffer code;
  StaticMetrics metrics;
  uint32_t num_locals = 0;
  uint32_t frame_slots = 0;
  std::vector<LoopHeader> loops;  // in bytecode order
  // For each vpc, the outermost loop header bound there, or -1.
  std::vector<int64_t> header_at_vpc;
  uint32_t max_live_snapshots = 0;

  std::optional<uint32_t> vpc_for_loop(uint32_t wasm_pc) const;
};

// Compiles one defined function in a single forward pass over its body. The
// tracker, if given, observes every body byte read.
CompiledFunction compile_function(const wasm::WasmModule& module, uint32_t func, const CompilerConfig& config,
                                  wasm::ReadTracker* tracker = nullptr);

}  // namespace spc::compiler

#endif  // SPC_COMPILER_COMPILER_H
