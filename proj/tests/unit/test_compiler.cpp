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

#include <fstream>
#include <sstream>

#include "helpers.h"
#include "spc/harness/kernels.h"

using namespace spc;
using namespace spc::test;
using compiler::CompilerConfig;
using compiler::Tagging;
using runtime::Mode;
using visa::VOp;

namespace {

size_t alu_count(const compiler::CompiledFunction& cf) {
  return count_ops(cf, VOp::Alu) + count_ops(cf, VOp::AluImm);
}

size_t count_in(const compiler::CompiledFunction& cf, VOp op, uint32_t from, uint32_t to) {
  size_t n = 0;
  for (uint32_t k = from; k < to; k++) n += cf.code.at(k).op == op;
  return n;
}

std::vector<uint32_t> positions(const compiler::CompiledFunction& cf, VOp op) {
  std::vector<uint32_t> out;
  for (uint32_t k = 0; k < cf.code.size(); k++)
    if (cf.code.at(k).op == op) out.push_back(k);
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("constant operands fold to a single move") {
  auto bytes = single({}, I32, {}, [](CodeBuilder& c) { c.i32_const(2).i32_const(3).op(Opcode::I32Add); });
  auto cf = compile_last(bytes, CompilerConfig::allopt());
  CHECK(alu_count(cf) == 0);
  auto movs = positions(cf, VOp::MovRI);
  REQUIRE(movs.size() == 1);
  CHECK(cf.code.at(movs[0]).imm == 5);
  CHECK(*run(bytes, Mode::Interp).value == TypedValue::i32(5));
  CHECK(*run(bytes, Mode::Jit).value == TypedValue::i32(5));
}

TEST_CASE("adding zero is removed only when folding is on") {
  auto bytes = single({I32}, I32, {}, [](CodeBuilder& c) { c.local_get(0).i32_const(0).op(Opcode::I32Add); });
  auto fast = compile_last(bytes, CompilerConfig::allopt());
  auto slow = compile_last(bytes, CompilerConfig::nok());
  CHECK(alu_count(fast) == 0);
  CHECK(count_ops(slow, VOp::Alu) == 1);
  for (auto cfg : {CompilerConfig::allopt(), CompilerConfig::nok()})
    CHECK(*run(bytes, Mode::Jit, cfg, {TypedValue::i32(-17)}).value == TypedValue::i32(-17));
}

TEST_CASE("local.get of a cached local costs one move only without multi_reg") {
  auto bytes = single({I32}, I32, {I32}, [](CodeBuilder& c) {
    c.local_get(0).i32_const(1).op(Opcode::I32Add).local_set(1);
    c.local_get(1).local_get(1).op(Opcode::I32Mul);
  });
  auto fast = compile_last(bytes, CompilerConfig::allopt());
  auto slow = compile_last(bytes, CompilerConfig::nomr());
  // Local 1 lives in a register; each of the two gets is free or one mov.rr.
  CHECK(count_ops(fast, VOp::MovRR) == 0);
  CHECK(count_ops(slow, VOp::MovRR) == 2);
  CHECK(slow.code.size() - fast.code.size() == 2);
  CHECK(count_ops(fast, VOp::LoadSlot) == 1);
  for (auto cfg : {CompilerConfig::allopt(), CompilerConfig::nomr()})
    CHECK(*run(bytes, Mode::Jit, cfg, {TypedValue::i32(3)}).value == TypedValue::i32(16));
}

TEST_CASE("local.set of a constant emits nothing and later uses fold") {
  auto bytes = single({}, I32, {I32}, [](CodeBuilder& c) {
    c.i32_const(7).local_set(0).local_get(0).i32_const(1).op(Opcode::I32Add);
  });
  auto cf = compile_last(bytes, CompilerConfig::allopt());
  CHECK(alu_count(cf) == 0);
  CHECK(count_ops(cf, VOp::StoreSlot) + count_ops(cf, VOp::StoreSlotImm) == 0);
  auto movs = positions(cf, VOp::MovRI);
  REQUIRE(movs.size() == 1);
  CHECK(cf.code.at(movs[0]).imm == 8);
}

TEST_CASE("br_if on constant true becomes an unconditional jump") {
  auto bytes = single({I32}, I32, {}, [](CodeBuilder& c) {
    c.block().i32_const(1).br_if(0);
    c.local_get(0).i32_const(5).op(Opcode::I32Add).local_set(0);
    c.end().local_get(0);
  });
  auto cf = compile_last(bytes, CompilerConfig::allopt());
  CHECK(count_ops(cf, VOp::Cmp) + count_ops(cf, VOp::CmpImm) == 0);
  CHECK(count_ops(cf, VOp::BrCC) + count_ops(cf, VOp::BrCCImm) == 0);
  CHECK(count_ops(cf, VOp::Jmp) <= 1);
  CHECK(alu_count(cf) == 0);
  CHECK(*run(bytes, Mode::Jit, {}, {TypedValue::i32(4)}).value == TypedValue::i32(4));
  CHECK(*run(bytes, Mode::Interp, {}, {TypedValue::i32(4)}).value == TypedValue::i32(4));
}

TEST_CASE("br_if on constant false emits nothing") {
  auto with = single({I32}, I32, {}, [](CodeBuilder& c) {
    c.block().i32_const(0).br_if(0).local_get(0).i32_const(5).op(Opcode::I32Add).local_set(0).end().local_get(0);
  });
  auto without = single({I32}, I32, {}, [](CodeBuilder& c) {
    c.block().local_get(0).i32_const(5).op(Opcode::I32Add).local_set(0).end().local_get(0);
  });
  auto a = compile_last(with, CompilerConfig::allopt());
  auto b = compile_last(without, CompilerConfig::allopt());
  CHECK(a.code.size() == b.code.size());
  CHECK(*run(with, Mode::Jit, {}, {TypedValue::i32(4)}).value == TypedValue::i32(9));
}

TEST_CASE("eqz feeding br_if fuses into one compare-and-branch") {
  auto bytes = single({I32}, I32, {}, [](CodeBuilder& c) {
    c.block().local_get(0).op(Opcode::I32Eqz).br_if(0);
    c.local_get(0).i32_const(5).op(Opcode::I32Add).local_set(0);
    c.end().local_get(0);
  });
  auto cf = compile_last(bytes, CompilerConfig::allopt());
  CHECK(count_ops(cf, VOp::BrCC) + count_ops(cf, VOp::BrCCImm) == 1);
  CHECK(count_ops(cf, VOp::SetCC) == 0);
  CHECK(count_ops(cf, VOp::Cmp) + count_ops(cf, VOp::CmpImm) == 0);
  for (int32_t p : {0, 3})
    CHECK(run(bytes, Mode::Jit, {}, {TypedValue::i32(p)}) == run(bytes, Mode::Interp, {}, {TypedValue::i32(p)}));
}

TEST_CASE("calls spill and tag live operands once") {
  FuncSpec callee{{I32, I32}, I32, {}, [](CodeBuilder& c) { c.local_get(0).local_get(1).op(Opcode::I32Sub); }};
  FuncSpec nothing{{}, std::nullopt, {}, [](CodeBuilder&) {}};
  FuncSpec direct{{I32}, I32, {}, [](CodeBuilder& c) {
                    c.local_get(0).i32_const(1).op(Opcode::I32Add);
                    c.local_get(0).i32_const(2).op(Opcode::I32Add);
                    c.call(0);
                  }};
  FuncSpec twice{{I32}, I32, {}, [](CodeBuilder& c) {
                   c.local_get(0).i32_const(1).op(Opcode::I32Add);
                   c.local_get(0).i32_const(2).op(Opcode::I32Add);
                   c.call(1).call(0);
                 }};
  auto one = module_of({callee, direct});
  auto two = module_of({callee, nothing, twice});

  auto cf = compile_last(one, with_tagging(CompilerConfig::allopt(), Tagging::OnDemand));
  auto calls = positions(cf, VOp::Call);
  REQUIRE(calls.size() == 1);
  CHECK(count_in(cf, VOp::StoreSlot, 0, calls[0]) == 2);
  CHECK(count_in(cf, VOp::StoreTag, 0, calls[0]) == 2);

  auto none = compile_last(one, with_tagging(CompilerConfig::allopt(), Tagging::None));
  CHECK(count_ops(none, VOp::StoreSlot) == 2);
  CHECK(count_ops(none, VOp::StoreTag) == 0);

  auto cf2 = compile_last(two, with_tagging(CompilerConfig::allopt(), Tagging::OnDemand));
  auto calls2 = positions(cf2, VOp::Call);
  REQUIRE(calls2.size() == 2);
  CHECK(count_in(cf2, VOp::StoreSlot, 0, calls2[0]) == 2);
  CHECK(count_in(cf2, VOp::StoreTag, 0, calls2[0]) == 2);
  CHECK(count_in(cf2, VOp::StoreSlot, calls2[0] + 1, calls2[1]) == 0);
  CHECK(count_in(cf2, VOp::StoreTag, calls2[0] + 1, calls2[1]) == 0);

  for (Tagging t : {Tagging::None, Tagging::Eager, Tagging::OnDemand, Tagging::Lazy})
    CHECK(*run(two, Mode::Jit, with_tagging({}, t), {TypedValue::i32(10)}).value == TypedValue::i32(-1));
}

TEST_CASE("eager tagging stores a tag per write, on-demand none without calls") {
  auto bytes = single({I32, I32}, I32, {}, [](CodeBuilder& c) {
    c.local_get(0);
    for (int k = 0; k < 100; k++) c.local_get(1).op(Opcode::I32Add);
  });
  auto dyn = [&](Tagging t) {
    Instance inst(bytes, opts_for(Mode::Jit, with_tagging({}, t)));
    auto o = inst.run({TypedValue::i32(1), TypedValue::i32(2)});
    CHECK(*o.value == TypedValue::i32(201));
    return inst->counters().tag_stores;
  };
  CHECK(dyn(Tagging::Eager) >= 100);
  CHECK(dyn(Tagging::OnDemand) == 0);
  CHECK(dyn(Tagging::Lazy) == 0);
  CHECK(dyn(Tagging::None) == 0);
}

TEST_CASE("lazy tagging still finds a root held in a local") {
  auto bytes = single({}, I32, {REF, I32}, [](CodeBuilder& c) {
    c.i32_const(41).call(kMakeRef).local_set(0);
    c.local_get(1).i32_const(3).op(Opcode::I32Add).local_set(1);
    c.call(kGcScan);
    c.local_get(0).call(kRefId).local_get(1).op(Opcode::I32Add);
  }, true);
  Instance ref(bytes, opts_for(Mode::Interp));
  auto expect = ref.run();
  Instance lazy(bytes, opts_for(Mode::Jit, with_tagging({}, Tagging::Lazy)));
  auto got = lazy.run();
  CHECK(got == expect);
  auto scan = [](const std::vector<runtime::HostEvent>& ev) {
    for (const auto& e : ev)
      if (e.name == "gc_scan") return e;
    return runtime::HostEvent{};
  };
  auto a = scan(ref->events()), b = scan(lazy->events());
  REQUIRE(a.scanned);
  REQUIRE(b.scanned);
  CHECK(a.roots.size() == 1);
  CHECK(a.roots == b.roots);
  CHECK(count_ops(compile_last(bytes, with_tagging({}, Tagging::Lazy)), VOp::StoreTag) == 0);
}

TEST_CASE("no tagging executes no tag stores on any kernel") {
  for (const auto& k : harness::shipped_kernels()) {
    Instance inst(k.bytes, opts_for(Mode::Jit, with_tagging({}, Tagging::None)));
    inst.run();
    CHECK(inst->counters().tag_stores == 0);
  }
}

TEST_CASE("the compiler reads each body byte once") {
  for (const auto& k : harness::shipped_kernels()) {
    auto m = load(k.bytes);
    for (uint32_t f = m.num_imports(); f < m.num_functions(); f++) {
      const auto& wf = m.defined(f);
      wasm::ReadTracker t(wf.body_offset + wf.code_offset, wf.body_offset + wf.body_size);
      compiler::compile_function(m, f, CompilerConfig::allopt(), &t);
      CHECK(t.each_read_once());
    }
  }
}

TEST_CASE("allopt emits no more instructions than any single ablation") {
  std::vector<std::vector<uint8_t>> mods;
  for (const auto& k : harness::shipped_kernels()) mods.push_back(k.bytes);
  mods.push_back(harness::params_add_mul_module());
  for (const auto& bytes : mods) {
    auto m = load(bytes);
    for (uint32_t f = m.num_imports(); f < m.num_functions(); f++) {
      auto base = compiler::compile_function(m, f, CompilerConfig::allopt()).metrics.instrs_emitted;
      for (auto c : {CompilerConfig::nok(), CompilerConfig::nokfold(), CompilerConfig::noisel(), CompilerConfig::nomr()})
        CHECK(base <= compiler::compile_function(m, f, c).metrics.instrs_emitted);
    }
  }
}

TEST_CASE("compiled frames use exactly the function's frame slots") {
  for (const auto& k : harness::shipped_kernels()) {
    auto m = load(k.bytes);
    for (uint32_t f = m.num_imports(); f < m.num_functions(); f++) {
      auto cf = compiler::compile_function(m, f, CompilerConfig::allopt());
      CHECK(cf.frame_slots == m.defined(f).frame_slots());
      CHECK(cf.num_locals == m.defined(f).num_locals);
    }
  }
}

TEST_CASE("golden: parameters in memory, add, multiply by constant, subtract") {
  auto bytes = harness::params_add_mul_module();
  auto cf = compile_last(bytes, CompilerConfig::allopt());
  std::string text = visa::disassemble(cf.code);
  CHECK(text == read_file(std::string(SPC_GOLDEN_DIR) + "/params_add_mul.disasm"));
  CHECK(count_ops(cf, VOp::MovRR) == 0);
  CHECK(cf.metrics.spills_emitted == 0);
  CHECK(cf.metrics.moves_emitted == 0);
  CHECK(*run(bytes, Mode::Jit, {}, {TypedValue::i32(3), TypedValue::i32(4)}).value == TypedValue::i32(18));
}
