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

#include "spc/harness/bench.h"

#include <chrono>
#include <sstream>

#include "spc/harness/kernels.h"
#include "spc/harness/m0.h"
#include "spc/wasm/decoder.h"
#include "spc/wasm/validator.h"

namespace spc::harness {

namespace {

uint64_t now_ns() {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

}  // namespace

std::string csv_row(const MetricsRecord& r) {
  std::ostringstream s;
  const auto& m = r.stat;
  s << r.suite << "," << r.module << "," << r.config << "," << r.repetition << "," << m.code_bytes_in << ","
    << m.code_bytes_out << "," << m.instrs_emitted << "," << m.moves_emitted << "," << m.spills_emitted << ","
    << m.tag_stores_emitted << "," << r.instrs_retired << "," << r.cost_units << "," << r.tag_stores_executed << ","
    << r.decode_validate_ns << "," << m.compile_ns << "," << r.setup_ns << "," << r.exec_ns << ",";
  if (!r.failure.empty())
    s << r.failure;
  else if (r.adjusted_speedup)
    s << *r.adjusted_speedup;
  return s.str();
}

std::string EngineConfig::name() const {
  if (mode == runtime::Mode::Interp) return "int";
  if (mode == runtime::Mode::Jit) return config.name();
  return "tiered-" + config.name();
}

std::optional<EngineConfig> engine_from_name(std::string_view name) {
  if (name == "int") return EngineConfig::interpreter();
  EngineConfig e;
  std::string_view rest;
  if (name.starts_with("jit-")) {
    e.mode = runtime::Mode::Jit;
    rest = name.substr(4);
  } else if (name.starts_with("tiered-")) {
    e.mode = runtime::Mode::Tiered;
    rest = name.substr(7);
  } else {
    e.mode = runtime::Mode::Jit;
    rest = name;
  }
  std::string_view ablation = rest;
  std::optional<compiler::Tagging> tagging;
  if (size_t plus = rest.find('+'); plus != std::string_view::npos) {
    ablation = rest.substr(0, plus);
    tagging = compiler::tagging_from_flag(rest.substr(plus + 1));
    if (!tagging) return std::nullopt;
  }
  auto c = compiler::ablation_from_name(ablation);
  if (!c) return std::nullopt;
  e.config = *c;
  if (tagging) e.config.tagging = *tagging;
  return e;
}

RunResult run_module(std::span<const uint8_t> bytes, const EngineConfig& engine, const RunOptions& opts) {
  RunResult r;
  r.metrics.config = engine.name();
  uint64_t t0 = now_ns();
  wasm::WasmModule m = wasm::decode_module(bytes);
  wasm::validate(m);
  uint64_t t1 = now_ns();
  r.metrics.decode_validate_ns = t1 - t0;
  r.setup_units = bytes.size();

  runtime::MachineOptions mo;
  mo.mode = engine.mode;
  mo.config = engine.config;
  mo.cost_limit = opts.cost_limit;
  mo.hot_threshold = opts.hot_threshold;
  mo.strict_scan = opts.strict_scan;
  mo.trace = opts.trace;
  mo.print = opts.print;
  runtime::Machine machine(m, mo);
  if (engine.mode == runtime::Mode::Jit) machine.compile_all();
  uint64_t t2 = now_ns();
  r.metrics.setup_ns = t2 - t0;
  r.outcome = machine.run_main(opts.args);
  r.metrics.exec_ns = now_ns() - t2;

  r.metrics.stat = machine.static_metrics();
  if (engine.mode == runtime::Mode::Interp)
    for (const auto& f : m.functions) r.metrics.stat.code_bytes_in += f.body_size;
  if (engine.mode == runtime::Mode::Jit) r.setup_units += r.metrics.stat.code_bytes_in + r.metrics.stat.instrs_emitted;
  const auto& c = machine.counters();
  r.metrics.instrs_retired = c.bytecodes + c.instrs_retired;
  r.metrics.cost_units = c.exec_units();
  r.metrics.tag_stores_executed = c.tag_stores;
  r.exec_units = c.exec_units();
  if (!r.outcome.ok()) r.metrics.failure = runtime::to_string(r.outcome);
  return r;
}

std::vector<SqPoint> measure_sq(const std::vector<EngineConfig>& configs, const std::vector<NamedModule>& modules,
                                uint32_t repetitions, const std::string& suite, std::ostream* csv) {
  if (repetitions == 0) throw std::invalid_argument("measure_sq: repetitions must be at least 1");
  if (configs.empty()) throw std::invalid_argument("measure_sq: no configs");
  std::vector<uint8_t> nop = mnop_module();
  std::vector<SqPoint> points;
  std::vector<uint64_t> baseline(modules.size(), 0);
  for (size_t ci = 0; ci < configs.size(); ci++) {
    const EngineConfig& e = configs[ci];
    for (size_t mi = 0; mi < modules.size(); mi++) {
      const NamedModule& mod = modules[mi];
      std::vector<uint8_t> m0 = make_m0(mod.bytes);
      SqPoint p;
      p.config = e.name();
      p.module = mod.name;
      uint64_t best_setup_ns = UINT64_MAX;
      for (uint32_t rep = 0; rep < repetitions; rep++) {
        RunResult rn = run_module(nop, e);
        RunResult r0 = run_module(m0, e);
        RunResult rm = run_module(mod.bytes, e);
        p.t_nop = rn.total_units();
        p.t_m0 = r0.total_units();
        p.t_m = rm.total_units();
        uint64_t wall0 = r0.metrics.setup_ns + r0.metrics.exec_ns;
        uint64_t walln = rn.metrics.setup_ns + rn.metrics.exec_ns;
        best_setup_ns = std::min(best_setup_ns, wall0 > walln ? wall0 - walln : 1);
        if (ci == 0) baseline[mi] = p.adjusted();
        p.adjusted_speedup = static_cast<double>(baseline[mi]) / static_cast<double>(p.adjusted());
        rm.metrics.suite = suite;
        rm.metrics.module = mod.name;
        rm.metrics.repetition = rep;
        rm.metrics.adjusted_speedup = p.adjusted_speedup;
        if (csv) *csv << csv_row(rm.metrics) << "\n";
      }
      p.setup_speed_mbps = static_cast<double>(mod.bytes.size()) / 1e6 / (static_cast<double>(best_setup_ns) / 1e9);
      points.push_back(p);
    }
  }
  return points;
}

}  // namespace spc::harness
