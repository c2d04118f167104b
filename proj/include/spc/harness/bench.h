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

#ifndef SPC_HARNESS_BENCH_H
#define SPC_HARNESS_BENCH_H

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "spc/runtime/machine.h"

namespace spc::harness {

inline constexpr const char* kCsvHeader =
    "suite,module,config,repetition,code_bytes_in,code_bytes_out,instrs_emitted,moves_emitted,spills_emitted,"
    "tag_stores_emitted,instrs_retired,cost_units,tag_stores_executed,decode_validate_ns,compile_ns,setup_ns,"
    "exec_ns,adjusted_speedup";

struct MetricsRecord {
  std::string suite;
  std::string module;
  std::string config;
  uint32_t repetition = 0;
  compiler::StaticMetrics stat;
  uint64_t instrs_retired = 0;
  uint64_t cost_units = 0;
  uint64_t tag_stores_executed = 0;
  uint64_t decode_validate_ns = 0;
  uint64_t setup_ns = 0;
  uint64_t exec_ns = 0;
  // Empty when not measured; failures are written in its place.
  std::optional<double> adjusted_speedup;
  std::string failure;
};

std::string csv_row(const MetricsRecord& r);

// An engine configuration: the interpreter, or a compiler config run in
// the emulator (optionally tiered).
struct EngineConfig {
  runtime::Mode mode = runtime::Mode::Interp;
  compiler::CompilerConfig config;
  std::string name() const;
  static EngineConfig interpreter() { return {}; }
  static EngineConfig jit(compiler::CompilerConfig c) { return {runtime::Mode::Jit, c}; }
};

// Parses "int", "[jit-]<ablation>[+<tagging>]" or "tiered-<ablation>[+<tagging>]".
std::optional<EngineConfig> engine_from_name(std::string_view name);

struct RunResult {
  runtime::Outcome outcome;
  MetricsRecord metrics;
  // Deterministic time model: setup units are bytes decoded and validated
  // plus, for compiled configs, bytes compiled and instructions emitted;
  // exec units are bytecodes plus emulator cost units.
  uint64_t setup_units = 0;
  uint64_t exec_units = 0;
  uint64_t total_units() const { return setup_units + exec_units; }
};

struct RunOptions {
  uint64_t cost_limit = 0;
  uint32_t hot_threshold = 10;
  bool strict_scan = true;
  std::ostream* trace = nullptr;
  std::ostream* print = nullptr;
  std::vector<wasm::TypedValue> args;
};

// Decodes, validates, compiles (when the config compiles) and runs main.
// Malformed or invalid modules throw.
RunResult run_module(std::span<const uint8_t> bytes, const EngineConfig& engine, const RunOptions& opts = {});

struct SqPoint {
  std::string config;
  std::string module;
  uint64_t t_nop = 0;  // T_E(M_nop)
  uint64_t t_m0 = 0;   // T_E(m0)
  uint64_t t_m = 0;    // T_E(m)
  double setup_speed_mbps = 0;
  double adjusted_speedup = 0;
  uint64_t setup_bound() const { return t_m0 - t_nop; }
  uint64_t adjusted() const { return t_m - t_m0; }
};

struct NamedModule {
  std::string name;
  std::vector<uint8_t> bytes;
};

// Runs every config over M_nop, m0 and m for each module. The first config
// is the baseline for adjusted speedups. Rows go to csv (if given), one per
// (config, module, repetition).
std::vector<SqPoint> measure_sq(const std::vector<EngineConfig>& configs, const std::vector<NamedModule>& modules,
                                uint32_t repetitions, const std::string& suite, std::ostream* csv);

}  // namespace spc::harness

#endif  // SPC_HARNESS_BENCH_H
