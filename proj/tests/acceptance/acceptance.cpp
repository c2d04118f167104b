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

// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Everything is measured in counters and cost units except the
// compile-time linearity check, which uses the best of several timings.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "spc/compiler/compiler.h"
#include "spc/harness/bench.h"
#include "spc/harness/fuzz.h"
#include "spc/harness/kernels.h"
#include "spc/runtime/machine.h"
#include "spc/wasm/builder.h"
#include "spc/wasm/decoder.h"
#include "spc/wasm/validator.h"

using namespace spc;
using compiler::CompilerConfig;
using compiler::Tagging;
using runtime::Mode;
using wasm::Opcode;
using wasm::TypedValue;
using wasm::ValType;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) failures++;
}

wasm::WasmModule load(const std::vector<uint8_t>& bytes) {
  wasm::WasmModule m = wasm::decode_module(bytes);
  wasm::validate(m);
  return m;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---- fuzzing: differential, roots, frames, schedules ----

harness::FuzzReport fuzz_report;
double fuzz_seconds = 0;

void run_fuzzer() {
  harness::FuzzOptions o;
  o.seed = 1;
  o.count = 10000;
  o.configs = harness::config_matrix({Tagging::None, Tagging::Eager, Tagging::OnDemand, Tagging::Lazy});
  o.root_taggings = {Tagging::Eager, Tagging::EagerOps, Tagging::EagerLocals, Tagging::OnDemand, Tagging::Lazy};
  o.tier_schedules_per_case = 1;
  o.audit = true;
  auto t0 = std::chrono::steady_clock::now();
  fuzz_report = harness::run_fuzz(o);
  fuzz_seconds = seconds_since(t0);
  if (fuzz_report.first)
    std::cout << "first divergence: case " << fuzz_report.first->case_index << " " << fuzz_report.first->config
              << ": " << fuzz_report.first->detail << "\n"
              << fuzz_report.first->reproducer << std::endl;
}

void differential() {
  const auto& r = fuzz_report;
  bool ok = r.cases == 10000 && r.divergences == 0 && fuzz_seconds < 600;
  report(ok, "differential-equivalence",
         std::to_string(r.cases) + " cases x 20 configs, " + std::to_string(r.runs) + " runs, " +
             std::to_string(r.divergences) + " divergences, " + std::to_string(r.skipped) + " skipped, " +
             std::to_string(r.traps) + " trapping runs, " + fmt("%.1f s", fuzz_seconds));
}

void root_oracle() {
  const auto& r = fuzz_report;
  report(r.root_cases > 0 && r.root_mismatches == 0, "root-set-oracle",
         std::to_string(r.root_cases) + " cases with live refs at a scan, " + std::to_string(r.root_mismatches) +
             " mismatches over eager, eager-ops, eager-locals, on-demand, lazy");
}

// ---- tagging ----

void tagging() {
  auto bytes = harness::arith_loop_kernel(1000000);
  auto m = load(bytes);
  std::map<Tagging, runtime::Counters> c;
  std::optional<runtime::Outcome> first;
  bool same = true;
  for (Tagging t : {Tagging::None, Tagging::Eager, Tagging::OnDemand, Tagging::Lazy}) {
    runtime::MachineOptions o;
    o.mode = Mode::Jit;
    o.config.tagging = t;
    runtime::Machine mach(m, o);
    auto out = mach.run_main({});
    if (!first) first = out;
    same = same && out == *first && out.ok();
    c[t] = mach.counters();
  }
  uint64_t none = c[Tagging::None].tag_stores, eager = c[Tagging::Eager].tag_stores;
  uint64_t od = c[Tagging::OnDemand].tag_stores, lazy = c[Tagging::Lazy].tag_stores;
  double cost_ratio = static_cast<double>(c[Tagging::Eager].cost_units) / static_cast<double>(c[Tagging::None].cost_units);
  bool ok = same && none == 0 && od * 100 <= eager && lazy <= od && cost_ratio >= 1.3;
  report(ok, "tagging-directionality",
         "tag stores none=" + std::to_string(none) + " eager=" + std::to_string(eager) + " on-demand=" +
             std::to_string(od) + " lazy=" + std::to_string(lazy) + ", eager/none cost " + fmt("%.3f", cost_ratio));
}

// ---- ablations ----

void ablation() {
  bool ok = true;
  std::string worst;
  double const_saving = 0;
  for (const auto& k : harness::shipped_kernels()) {
    auto m = load(k.bytes);
    auto total = [&](CompilerConfig c) {
      uint64_t n = 0;
      for (uint32_t f = m.num_imports(); f < m.num_functions(); f++)
        n += compiler::compile_function(m, f, c).metrics.instrs_emitted;
      return n;
    };
    uint64_t base = total(CompilerConfig::allopt());
    for (auto [name, c] : {std::pair{"nok", CompilerConfig::nok()}, std::pair{"nokfold", CompilerConfig::nokfold()},
                           std::pair{"noisel", CompilerConfig::noisel()}, std::pair{"nomr", CompilerConfig::nomr()}}) {
      uint64_t other = total(c);
      if (base > other) {
        ok = false;
        worst += " " + k.name + ":" + name;
      }
      if (k.name == "const-heavy" && std::string(name) == "nok")
        const_saving = 1.0 - static_cast<double>(base) / static_cast<double>(other);
    }
  }
  ok = ok && const_saving >= 0.30;
  report(ok, "ablation-directionality",
         "allopt <= every single ablation on all kernels" + (worst.empty() ? std::string() : " except" + worst) +
             ", const-heavy allopt vs nok " + fmt("%.1f%% fewer", const_saving * 100));
}

// ---- linearity ----

void linearity() {
  const std::vector<std::pair<size_t, int>> sizes{{1 << 10, 400}, {10 << 10, 80}, {100 << 10, 12}, {1 << 20, 3}};
  std::vector<double> per_byte;
  bool single_pass = true;
  for (auto [size, reps] : sizes) {
    auto m = load(harness::deep_nesting_module(size));
    uint32_t f = m.num_functions() - 1;
    const auto& wf = m.defined(f);
    double best = 1e300;
    for (int r = 0; r < reps; r++) {
      auto cf = compiler::compile_function(m, f, CompilerConfig::allopt());
      best = std::min(best, static_cast<double>(cf.metrics.compile_ns) / static_cast<double>(cf.metrics.code_bytes_in));
    }
    wasm::ReadTracker t(wf.body_offset + wf.code_offset, wf.body_offset + wf.body_size);
    compiler::compile_function(m, f, CompilerConfig::allopt(), &t);
    single_pass = single_pass && t.each_read_once();
    per_byte.push_back(best);
  }
  double lo = 1e300, hi = 0;
  for (double v : per_byte) {
    lo = std::min(lo, v / per_byte[0]);
    hi = std::max(hi, v / per_byte[0]);
  }
  bool ok = single_pass && hi < 5.0 && lo > 0.2;
  std::string detail = "ns/byte";
  for (double v : per_byte) detail += fmt(" %.2f", v);
  detail += " for 1K,10K,100K,1M; ratio to 1K in [" + fmt("%.2f", lo) + ", " + fmt("%.2f", hi) + "]";
  detail += single_pass ? ", every byte read once" : ", bytes re-read";
  report(ok, "single-pass-linearity", detail);
}

// ---- frames and tiering ----

// helper(x) prints x and returns x + 1; main loops 20 times through it.
std::vector<uint8_t> probe_module() {
  wasm::ModuleBuilder mb;
  mb.import_func("host", "gc_scan", mb.add_type({}, std::nullopt));
  mb.import_func("host", "make_ref", mb.add_type({ValType::I32}, ValType::Ref));
  mb.import_func("host", "ref_id", mb.add_type({ValType::Ref}, ValType::I32));
  mb.import_func("host", "print", mb.add_type({ValType::I64}, std::nullopt));
  auto& h = mb.add_function(mb.add_type({ValType::I32}, ValType::I32));
  h.code().local_get(0).op(Opcode::I64ExtendI32U).call(3).local_get(0).i32_const(1).op(Opcode::I32Add).end();
  auto& f = mb.add_function(mb.add_type({}, ValType::I32));
  f.add_locals(1, ValType::I32);
  f.code().loop().local_get(0).call(h.index()).local_set(0);
  f.code().local_get(0).i32_const(20).op(Opcode::I32LtU).br_if(0).end().local_get(0).end();
  mb.export_func("main", f.index());
  return mb.build();
}

struct Hit {
  uint32_t func;
  uint64_t value;
  size_t prints;  // print events seen before the hit
  bool operator==(const Hit& o) const { return func == o.func && value == o.value; }
};

bool probe_suffixes(uint32_t& checks) {
  auto bytes = probe_module();
  auto m = load(bytes);
  const uint32_t helper = 4, main = 5;
  const uint32_t loop_body = m.defined(main).code_offset + 2, entry = m.defined(helper).code_offset;
  auto probe_all = [&](runtime::Machine& mach, std::vector<Hit>& hits) {
    for (auto [fn, pc] : {std::pair{main, loop_body}, std::pair{helper, entry}})
      mach.insert_probe(fn, pc, [&hits, &mach, fn](const runtime::FrameView& v) {
        hits.push_back({fn, v.value(0), mach.events().size()});
      });
  };
  std::vector<Hit> full;
  {
    runtime::Machine mach(m, {});
    probe_all(mach, full);
    mach.run_main({});
  }
  bool ok = full.size() == 40;
  std::vector<CompilerConfig> cfgs = harness::config_matrix({Tagging::Eager, Tagging::OnDemand, Tagging::Lazy});
  for (const auto& cfg : cfgs)
    for (size_t after : {1, 2, 7, 19}) {
      runtime::MachineOptions o;
      o.mode = Mode::Tiered;
      o.config = cfg;
      o.hot_threshold = 1;
      runtime::Machine mach(m, o);
      std::vector<Hit> late;
      mach.set_host_hook([&](runtime::Machine& mm, const runtime::HostEvent&) {
        if (mm.events().size() == after) probe_all(mm, late);
      });
      auto out = mach.run_main({});
      size_t expect = static_cast<size_t>(std::count_if(full.begin(), full.end(), [&](const Hit& h) { return h.prints >= after; }));
      ok = ok && out.ok() && late.size() == expect && mach.counters().tier_downs > 0 &&
           std::equal(late.begin(), late.end(), full.end() - static_cast<long>(expect));
      checks++;
    }
  return ok;
}

void frames_and_tiering() {
  const auto& r = fuzz_report;
  uint32_t probe_checks = 0;
  bool probes = probe_suffixes(probe_checks);
  bool ok = r.frame_mismatches == 0 && r.schedules >= 1000 && r.schedule_mismatches == 0 && probes;
  report(ok, "frame-compatibility-and-tiering",
         std::to_string(r.frame_mismatches) + " frame size mismatches over all fuzz functions, " +
             std::to_string(r.schedules) + " random tier schedules with " + std::to_string(r.schedule_mismatches) +
             " mismatches, " + std::to_string(probe_checks) + " mid-run probe insertions " +
             (probes ? "matching" : "NOT matching") + " the interpreter's trace suffix");
}

// ---- golden ----

void golden() {
  auto m = load(harness::params_add_mul_module());
  auto cf = compiler::compile_function(m, m.num_functions() - 1, CompilerConfig::allopt());
  std::ifstream in(std::string(SPC_GOLDEN_DIR) + "/params_add_mul.disasm");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = visa::disassemble(cf.code);
  bool match = !ss.str().empty() && text == ss.str();
  runtime::MachineOptions o;
  o.mode = Mode::Jit;
  runtime::Machine mach(m, o);
  std::vector<TypedValue> args{TypedValue::i32(3), TypedValue::i32(4)};
  auto out = mach.run_main(args);
  bool ok = match && cf.metrics.moves_emitted == 0 && cf.metrics.spills_emitted == 0 && out.value &&
            *out.value == TypedValue::i32(18);
  report(ok, "golden-codegen",
         std::string(match ? "disassembly matches golden" : "disassembly differs from golden") + ", " +
             std::to_string(cf.metrics.moves_emitted) + " moves, " + std::to_string(cf.metrics.spills_emitted) +
             " spills, " + std::to_string(cf.code.size()) + " instructions");
}

// ---- SQ ----

void sq() {
  std::vector<harness::NamedModule> mods;
  std::vector<bool> loops;
  for (const auto& k : harness::shipped_kernels()) {
    mods.push_back({k.name, k.bytes});
    loops.push_back(k.loop);
  }
  std::vector<harness::EngineConfig> configs{harness::EngineConfig::interpreter()};
  for (auto c : {CompilerConfig::allopt(), CompilerConfig::nok(), CompilerConfig::nokfold(), CompilerConfig::noisel(),
                 CompilerConfig::nomr()})
    configs.push_back(harness::EngineConfig::jit(c));
  for (Tagging t : {Tagging::Eager, Tagging::Lazy, Tagging::None}) {
    CompilerConfig c;
    c.tagging = t;
    configs.push_back(harness::EngineConfig::jit(c));
  }
  auto pts = harness::measure_sq(configs, mods, 1, "acceptance", nullptr);
  bool setup_ok = true, self_ok = true, jit_ok = true;
  double min_jit = 1e300;
  for (const auto& p : pts) {
    setup_ok = setup_ok && p.t_m0 > p.t_nop && p.t_m > p.t_m0;
    if (p.config == "int") self_ok = self_ok && p.adjusted_speedup == 1.0;
    if (p.config == "allopt") {
      size_t i = static_cast<size_t>(std::find_if(mods.begin(), mods.end(), [&](const auto& m) { return m.name == p.module; }) - mods.begin());
      if (loops[i]) {
        jit_ok = jit_ok && p.adjusted_speedup > 1.0;
        min_jit = std::min(min_jit, p.adjusted_speedup);
      }
    }
  }
  report(setup_ok && self_ok && jit_ok && pts.size() == configs.size() * mods.size(), "sq-self-consistency",
         std::to_string(pts.size()) + " points; T(m0)-T(Mnop) > 0 " + (setup_ok ? "everywhere" : "NOT everywhere") +
             "; interpreter vs itself " + (self_ok ? "1.0" : "NOT 1.0") + "; allopt min adjusted speedup " +
             fmt("%.2f", min_jit));
}

}  // namespace

int main() {
  run_fuzzer();
  differential();
  root_oracle();
  tagging();
  ablation();
  linearity();
  frames_and_tiering();
  golden();
  sq();
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failures ? 1 : 0;
}
