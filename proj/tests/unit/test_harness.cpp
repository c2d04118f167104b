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

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "helpers.h"
#include "spc/harness/bench.h"
#include "spc/harness/cli.h"
#include "spc/harness/fuzz.h"
#include "spc/harness/kernels.h"
#include "spc/harness/m0.h"

using namespace spc;
using namespace spc::test;
using namespace spc::harness;
using compiler::CompilerConfig;
using compiler::Tagging;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> n{0};
    path = fs::temp_directory_path() / ("spc-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string write(const std::string& name, const std::vector<uint8_t>& bytes) const {
    auto p = path / name;
    std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), static_cast<long>(bytes.size()));
    return p.string();
  }
};

struct Cli {
  int code;
  std::string out, err;
};

Cli cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<uint8_t> scanning_module() {
  return single({}, I32, {REF}, [](CodeBuilder& c) {
    c.i32_const(1).call(kMakeRef).local_set(0).call(kGcScan).local_get(0).call(kRefId);
  }, true);
}

}  // namespace

TEST_CASE("m0 of M_nop behaves like M_nop") {
  auto nop = mnop_module();
  auto m0 = make_m0(nop);
  for (auto mode : {runtime::Mode::Interp, runtime::Mode::Jit}) {
    auto a = run(nop, mode), b = run(m0, mode);
    CHECK(a == b);
    CHECK(a.ok());
    CHECK_FALSE(a.value.has_value());
  }
}

TEST_CASE("m0 needs an exported entry") {
  wasm::ModuleBuilder mb;
  mb.add_function(mb.add_type({}, std::nullopt)).code().end();
  CHECK_THROWS_AS(make_m0(mb.build()), NoEntry);
}

TEST_CASE("m0 keeps the code but returns at once") {
  for (const auto& k : shipped_kernels()) {
    auto m0 = make_m0(k.bytes);
    auto mod = load(m0);
    auto orig = load(k.bytes);
    CHECK(mod.num_functions() == orig.num_functions());
    Instance inst(m0, opts_for(runtime::Mode::Interp));
    CHECK(inst.run().ok());
    CHECK(inst->counters().bytecodes < 10);
    auto full = run_module(k.bytes, EngineConfig::interpreter());
    auto early = run_module(m0, EngineConfig::interpreter());
    CHECK(early.total_units() < full.total_units());
    auto jf = run_module(k.bytes, EngineConfig::jit(CompilerConfig::allopt()));
    auto je = run_module(m0, EngineConfig::jit(CompilerConfig::allopt()));
    CHECK(je.total_units() < jf.total_units());
    // Code compiled for m0 is the same code plus the early exit.
    double ratio = static_cast<double>(je.metrics.stat.code_bytes_in) / static_cast<double>(jf.metrics.stat.code_bytes_in);
    CHECK(ratio == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("m0 compile time stays within ten percent of m") {
  auto k = shipped_kernels().front();
  auto m0 = make_m0(k.bytes);
  auto best = [](const std::vector<uint8_t>& bytes) {
    auto mod = load(bytes);
    uint64_t b = UINT64_MAX;
    for (int rep = 0; rep < 15; rep++) {
      compiler::StaticMetrics s;
      for (uint32_t f = mod.num_imports(); f < mod.num_functions(); f++)
        s += compiler::compile_function(mod, f, CompilerConfig::allopt()).metrics;
      b = std::min(b, s.compile_ns);
    }
    return static_cast<double>(b);
  };
  best(k.bytes);
  double a = best(k.bytes), b = best(m0);
  CHECK(b <= a * 1.10);
  CHECK(b >= a * 0.90);
}

TEST_CASE("SQ measurement is self-consistent") {
  std::vector<NamedModule> mods;
  for (const auto& k : shipped_kernels()) mods.push_back({k.name, k.bytes});
  std::vector<EngineConfig> configs{EngineConfig::interpreter(), EngineConfig::jit(CompilerConfig::allopt()),
                                    EngineConfig::jit(CompilerConfig::nok())};
  std::ostringstream csv;
  csv << kCsvHeader << "\n";
  auto pts = measure_sq(configs, mods, 2, "test", &csv);
  REQUIRE(pts.size() == configs.size() * mods.size());
  for (const auto& p : pts) {
    CHECK(p.t_m0 > p.t_nop);
    CHECK(p.t_m > p.t_m0);
    CHECK(p.adjusted_speedup > 0);
    if (p.config == "int") CHECK(p.adjusted_speedup == 1.0);
    if (p.config == "allopt") CHECK(p.adjusted_speedup > 1.0);
  }
  auto rows = lines(csv.str());
  CHECK(rows.size() == 1 + configs.size() * mods.size() * 2);
  size_t columns = split(kCsvHeader, ',').size();
  for (const auto& r : rows) CHECK(split(r, ',').size() == columns);
}

TEST_CASE("engine names round-trip") {
  for (const char* n : {"int", "allopt", "nomr", "nok+eagertags", "tiered-allopt", "tiered-nokfold+lazytags"}) {
    auto e = engine_from_name(n);
    REQUIRE(e.has_value());
    CHECK(e->name() == n);
  }
  CHECK(engine_from_name("jit-noisel")->name() == "noisel");
  CHECK_FALSE(engine_from_name("bogus").has_value());
}

TEST_CASE("cli run") {
  TempDir dir;
  auto nop = dir.write("mnop.wasm", mnop_module());

  SUBCASE("M_nop under the interpreter exits 0") {
    auto r = cli({"run", "--mode=int", nop});
    CHECK(r.code == kExitOk);
  }
  SUBCASE("metrics row names the ablation") {
    auto csv = (dir.path / "m.csv").string();
    auto r = cli({"run", "--mode=jit", "--no-mr", "--metrics", csv, nop});
    CHECK(r.code == kExitOk);
    std::ifstream in(csv);
    std::stringstream ss;
    ss << in.rdbuf();
    auto rows = lines(ss.str());
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == kCsvHeader);
    CHECK(split(rows[1], ',')[2] == "nomr");
  }
  SUBCASE("scanning without tags is a trap") {
    auto f = dir.write("scan.wasm", scanning_module());
    auto r = cli({"run", "--mode=jit", "--tags=none", f});
    CHECK(r.code == kExitTrap);
    CHECK(r.out.find("ScanError") != std::string::npos);
    CHECK(cli({"run", "--mode=jit", "--tags=lazy", f}).code == kExitOk);
  }
  SUBCASE("arguments and traps") {
    auto f = dir.write("div.wasm", single({I32, I32}, I32, {}, [](CodeBuilder& c) {
      c.local_get(0).local_get(1).op(Opcode::I32DivS);
    }));
    auto ok = cli({"run", "--mode=jit", f, "--", "7", "2"});
    CHECK(ok.code == kExitOk);
    CHECK(ok.out.find("i32:3") != std::string::npos);
    auto bad = cli({"run", "--mode=tiered", f, "--", "7", "0"});
    CHECK(bad.code == kExitTrap);
    CHECK(bad.out.find("DivByZero") != std::string::npos);
  }
  SUBCASE("malformed input exits 1") {
    auto f = dir.write("junk.wasm", {0x00, 0x61, 0x73, 0x6d, 0x02});
    CHECK(cli({"run", f}).code == kExitInvalid);
    CHECK(cli({"run", (dir.path / "missing.wasm").string()}).code != kExitOk);
  }
  SUBCASE("disassembly") {
    auto f = dir.write("params_add_mul.wasm", params_add_mul_module());
    auto r = cli({"run", "--mode=jit", "--disasm", f, "--", "3", "4"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("0000: load.slot r0, [vfp+0] ; wasm@1") != std::string::npos);
  }
}

TEST_CASE("cli m0 and fuzz") {
  TempDir dir;
  auto in = dir.write("k.wasm", shipped_kernels().front().bytes);
  auto out = (dir.path / "k0.wasm").string();
  CHECK(cli({"m0", in, "-o", out}).code == kExitOk);
  CHECK(cli({"run", "--mode=int", out}).code == kExitOk);
  CHECK(cli({"fuzz", "--count", "0"}).code == kExitInvalid);
  auto r = cli({"fuzz", "--seed", "5", "--count", "50", "--configs", "allopt,nomr"});
  CHECK(r.code == kExitOk);
}

TEST_CASE("fuzzing seed 1 finds no divergence") {
  FuzzOptions o;
  o.seed = 1;
  o.count = 1000;
  o.configs = config_matrix({Tagging::None, Tagging::Eager, Tagging::OnDemand, Tagging::Lazy});
  o.root_taggings = {Tagging::Eager, Tagging::OnDemand, Tagging::Lazy};
  o.tier_schedules_per_case = 1;
  o.audit = true;
  auto r = run_fuzz(o);
  CHECK(r.cases == 1000);
  CHECK(r.divergences == 0);
  CHECK(r.root_mismatches == 0);
  CHECK(r.schedule_mismatches == 0);
  CHECK(r.frame_mismatches == 0);
  CHECK(r.root_cases > 0);
  CHECK(r.schedules == 1000);
  if (r.first) MESSAGE(r.first->detail << "\n" << r.first->reproducer);
}

TEST_CASE("a broken merge is caught within 1000 cases") {
  FuzzOptions o;
  o.seed = 1;
  o.count = 1000;
  CompilerConfig broken;
  broken.fault_broken_merge = true;
  o.configs = {broken};
  auto r = run_fuzz(o);
  REQUIRE(r.first.has_value());
  CHECK(r.first->case_index < 1000);
  CHECK_FALSE(r.first->reproducer.empty());
  // The shrunk reproducer still fails.
  CHECK(r.first->reproducer.size() < 4000);
}

TEST_CASE("generation is reproducible") {
  for (uint64_t s : {1ull, 99ull, 123456789ull}) {
    auto a = generate(case_seed(s, 7)), b = generate(case_seed(s, 7));
    CHECK(to_text(a) == to_text(b));
    auto ba = encode(a), bb = encode(b);
    CHECK(ba == bb);
    auto ma = load(ba);
    for (uint32_t f = ma.num_imports(); f < ma.num_functions(); f++) {
      auto x = compiler::compile_function(ma, f, CompilerConfig::allopt()).metrics;
      auto y = compiler::compile_function(ma, f, CompilerConfig::allopt()).metrics;
      CHECK(x.instrs_emitted == y.instrs_emitted);
      CHECK(x.code_bytes_out == y.code_bytes_out);
      CHECK(x.tag_stores_emitted == y.tag_stores_emitted);
    }
  }
  CHECK(to_text(generate(case_seed(1, 0))) != to_text(generate(case_seed(1, 1))));
}

TEST_CASE("every generated module validates") {
  for (uint64_t k = 0; k < 300; k++) CHECK_NOTHROW(load(encode(generate(case_seed(3, k)))));
}
