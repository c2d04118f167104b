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

#ifndef SPC_HARNESS_FUZZ_H
#define SPC_HARNESS_FUZZ_H

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spc/compiler/config.h"
#include "spc/runtime/machine.h"

namespace spc::harness {

// ---- generated programs ----

// One node of a generated function. Value nodes leave one value of `type`;
// all other nodes leave nothing. Branch targets are label ids, so deleting
// statements never changes what a branch refers to.
struct Node {
  enum class Kind : uint8_t { Const, Op, Block, Loop, If, Br, BrIf, BrTable, Return };
  Kind kind = Kind::Op;
  wasm::Opcode op = wasm::Opcode::Nop;
  bool value = false;
  wasm::ValType type = wasm::ValType::I32;
  uint64_t bits = 0;                // Const
  uint32_t imm = 0;                 // local, global, function, offset, loop count
  uint32_t imm2 = 0;                // loop counter local
  uint32_t label = 0;               // own label (blocks) or target (branches)
  std::vector<uint32_t> targets;    // br_table cases; label is the default
  std::vector<Node> kids;           // operands, in push order
  std::vector<Node> body;           // block, loop and then-arm contents
  std::vector<Node> alt;            // else-arm contents
};

struct FuzzFunction {
  std::vector<wasm::ValType> params;
  std::optional<wasm::ValType> result;
  std::vector<wasm::ValType> locals;  // declared, after params
  std::vector<Node> body;             // ends with a value node when result is set
};

struct FuzzModule {
  std::vector<wasm::TypedValue> globals;
  std::vector<uint8_t> data;  // placed at offset 16
  std::vector<FuzzFunction> functions;  // the last one is exported as main
};

// Host imports are always present at function indices 0..3.
inline constexpr uint32_t kImportGcScan = 0;
inline constexpr uint32_t kImportMakeRef = 1;
inline constexpr uint32_t kImportRefId = 2;
inline constexpr uint32_t kImportPrint = 3;
inline constexpr uint32_t kNumHostImports = 4;

struct GenOptions {
  uint32_t max_functions = 4;
  uint32_t max_nodes = 70;
  uint32_t max_depth = 5;
};

FuzzModule generate(uint64_t seed, const GenOptions& opts = {});
std::vector<uint8_t> encode(const FuzzModule& m);
std::string to_text(const FuzzModule& m);
// Per-case seed derived from a run seed.
uint64_t case_seed(uint64_t seed, uint64_t index);

// Greedy shrinking: deletes statements and replaces value nodes with
// constants while `still_fails` holds.
FuzzModule shrink(const FuzzModule& m, const std::function<bool(const FuzzModule&)>& still_fails,
                  uint32_t max_attempts = 4000);

// ---- differential execution ----

struct Observation {
  runtime::Outcome outcome;
  std::vector<uint8_t> memory;
  std::vector<uint64_t> globals;
  std::vector<runtime::HostEvent> events;
  runtime::Counters counters;
};

struct ExecConfig {
  runtime::Mode mode = runtime::Mode::Interp;
  compiler::CompilerConfig config;
  uint64_t cost_limit = 0;
  runtime::TierPolicy policy;
  bool audit = false;
};

Observation observe(const std::vector<uint8_t>& bytes, const ExecConfig& cfg);
// Empty when equal. Root sets are compared when compare_roots is set and the
// run was able to scan.
std::optional<std::string> compare(const Observation& oracle, const Observation& other, bool compare_roots);
// Whether the program scanned roots with at least one non-null ref live.
bool has_root_scan(const Observation& o);

struct FuzzOptions {
  uint64_t seed = 1;
  uint32_t count = 1000;
  std::vector<compiler::CompilerConfig> configs;  // compared against the interpreter
  std::vector<compiler::Tagging> root_taggings;    // root-set oracle configs
  uint32_t tier_schedules_per_case = 0;            // random tier schedules per case
  uint32_t threads = 0;                            // 0: hardware concurrency
  bool shrink = true;
  bool audit = false;
  GenOptions gen;
};

struct Divergence {
  uint32_t case_index = 0;
  uint64_t case_seed = 0;
  std::string config;
  std::string detail;
  std::string reproducer;
};

struct FuzzReport {
  uint32_t cases = 0;
  uint32_t skipped = 0;  // oracle exceeded its budget
  uint64_t runs = 0;
  uint32_t divergences = 0;
  uint32_t root_cases = 0;  // cases with a root scan seeing refs
  uint32_t root_mismatches = 0;
  uint32_t schedules = 0;
  uint32_t schedule_mismatches = 0;
  uint32_t frame_mismatches = 0;
  uint32_t traps = 0;
  std::optional<Divergence> first;
};

// The five single ablations crossed with the given taggings.
std::vector<compiler::CompilerConfig> config_matrix(const std::vector<compiler::Tagging>& taggings);

FuzzReport run_fuzz(const FuzzOptions& opts);

}  // namespace spc::harness

#endif  // SPC_HARNESS_FUZZ_H
