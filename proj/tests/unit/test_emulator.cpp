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

#include <sstream>

#include "helpers.h"
#include "spc/harness/kernels.h"

using namespace spc;
using namespace spc::test;
using runtime::Mode;

TEST_CASE("compiled constant return retires at most four instructions") {
  auto bytes = single({}, I32, {}, [](CodeBuilder& c) { c.i32_const(5); });
  Instance inst(bytes, opts_for(Mode::Jit));
  CHECK(*inst.run().value == TypedValue::i32(5));
  CHECK(inst->counters().instrs_retired <= 4);
  CHECK(inst->counters().bytecodes == 0);
}

TEST_CASE("compiled division by zero traps at the interpreter's pc") {
  auto bytes = single({I32}, I32, {I64}, [](CodeBuilder& c) {
    c.i64_const(7).local_set(1);
    c.local_get(1).local_get(0).op(Opcode::I64ExtendI32S).op(Opcode::I64RemU).op(Opcode::I32WrapI64);
    c.i32_const(100).local_get(0).op(Opcode::I32DivS).op(Opcode::I32Add);
  });
  std::vector<TypedValue> zero{TypedValue::i32(0)};
  auto a = run(bytes, Mode::Interp, {}, zero);
  auto b = run(bytes, Mode::Jit, {}, zero);
  CHECK(a.trap == wasm::TrapKind::DivByZero);
  CHECK(b == a);
  CHECK(run(bytes, Mode::Jit, {}, {TypedValue::i32(3)}) == run(bytes, Mode::Interp, {}, {TypedValue::i32(3)}));
}

TEST_CASE("memory.grow beyond the maximum returns -1") {
  auto bytes = single({I32}, I32, {}, [](CodeBuilder& c) {
    c.local_get(0).memory_grow().memory_size().op(Opcode::I32Const);
    c.u32(16).op(Opcode::I32Mul).op(Opcode::I32Add);
  }, false, 1);
  // Memory is 1 page with a maximum of 2.
  for (Mode mode : {Mode::Interp, Mode::Jit}) {
    CHECK(*run(bytes, mode, {}, {TypedValue::i32(1)}).value == TypedValue::i32(1 + 2 * 16));
    CHECK(*run(bytes, mode, {}, {TypedValue::i32(5)}).value == TypedValue::i32(-1 + 16));
    CHECK(*run(bytes, mode, {}, {TypedValue::i32(-1)}).value == TypedValue::i32(-1 + 16));
  }
}

TEST_CASE("out-of-bounds memory access traps in both tiers") {
  auto bytes = single({I32}, I32, {}, [](CodeBuilder& c) { c.local_get(0).mem(Opcode::I32Load, 4); }, false, 1);
  for (int32_t addr : {0, 65528, 65532, 70000, -4}) {
    auto a = run(bytes, Mode::Interp, {}, {TypedValue::i32(addr)});
    CHECK(run(bytes, Mode::Jit, {}, {TypedValue::i32(addr)}) == a);
    CHECK(a.ok() == (addr >= 0 && addr + 8 <= 65536));
  }
}

TEST_CASE("cost units equal an independent recount of the retired trace") {
  auto k = harness::shipped_kernels().front();
  std::ostringstream trace;
  auto opts = opts_for(Mode::Jit);
  opts.trace = &trace;
  Instance inst(k.bytes, opts);
  inst.run();
  std::istringstream in(trace.str());
  std::string line;
  uint64_t retired = 0, cost = 0;
  while (std::getline(in, line)) {
    auto colon = line.find(":@");
    REQUIRE(colon != std::string::npos);
    uint32_t func = static_cast<uint32_t>(std::stoul(line.substr(0, colon)));
    uint32_t vpc = static_cast<uint32_t>(std::stoul(line.substr(colon + 2)));
    cost += visa::instr_cost(inst->compiled(func).code.at(vpc).op);
    retired++;
  }
  CHECK(retired == inst->counters().instrs_retired);
  CHECK(cost == inst->counters().cost_units);
}

TEST_CASE("execution is deterministic") {
  for (const auto& k : harness::shipped_kernels()) {
    Instance a(k.bytes, opts_for(Mode::Jit)), b(k.bytes, opts_for(Mode::Jit));
    auto oa = a.run(), ob = b.run();
    CHECK(oa == ob);
    const auto& ca = a->counters();
    const auto& cb = b->counters();
    CHECK(ca.instrs_retired == cb.instrs_retired);
    CHECK(ca.cost_units == cb.cost_units);
    CHECK(ca.tag_stores == cb.tag_stores);
    CHECK(ca.slot_stores == cb.slot_stores);
    CHECK(a->memory() == b->memory());
  }
}

TEST_CASE("cost budget stops execution") {
  auto k = harness::shipped_kernels().front();
  auto opts = opts_for(Mode::Jit);
  opts.cost_limit = 1000;
  Instance inst(k.bytes, opts);
  auto o = inst.run();
  CHECK(o.status == runtime::Outcome::Status::Limit);
  CHECK(inst->counters().exec_units() <= 1000 + 5);
}

TEST_CASE("audits pass at every safepoint of the shipped kernels") {
  using compiler::Tagging;
  for (const auto& k : harness::shipped_kernels())
    for (Tagging t : {Tagging::None, Tagging::Eager, Tagging::OnDemand, Tagging::Lazy}) {
      auto opts = opts_for(Mode::Tiered, with_tagging({}, t));
      opts.audit = true;
      opts.strict_scan = false;
      Instance inst(k.bytes, opts);
      CHECK_NOTHROW(inst.run());
    }
}
