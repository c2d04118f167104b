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

#include "helpers.h"
#include "spc/compiler/abstract_state.h"

using namespace spc;
using namespace spc::test;
using compiler::AbstractState;
using visa::VOp;

TEST_CASE("alloc_reg picks the lowest free register of the class") {
  AbstractState st(0, 16, true);
  visa::CodeBuffer buf;
  CHECK(st.alloc_reg(I32, buf) == visa::kR0);
  CHECK(st.alloc_reg(F64, buf) == visa::kX0);
  uint32_t s = st.push(I32);
  st.bind(s, visa::kR0);
  CHECK(st.alloc_reg(I64, buf) == 1);
  CHECK(buf.size() == 0);
}

TEST_CASE("alloc_reg reuses a register caching a spilled slot without spilling") {
  AbstractState st(0, 16, true);
  visa::CodeBuffer buf;
  for (visa::Reg r = 0; r < visa::kNumIntRegs; r++) st.bind(st.push(I32), r);
  st.slot(5).stored = true;
  CHECK(st.alloc_reg(I32, buf) == 5);
  CHECK(buf.size() == 0);
}

TEST_CASE("alloc_reg evicts the least recently bound register with one store") {
  AbstractState st(0, 16, true);
  visa::CodeBuffer buf;
  for (visa::Reg r = 0; r < visa::kNumIntRegs; r++) st.bind(st.push(I32), r);
  CHECK(st.alloc_reg(I32, buf) == 0);
  REQUIRE(buf.size() == 1);
  CHECK(buf.at(0).op == VOp::StoreSlot);
  CHECK(buf.at(0).slot == 0);
  CHECK(st.slot(0).stored);
  CHECK(st.slot(0).reg == visa::kNoReg);
  CHECK(st.consistent());
}

TEST_CASE("snapshot of two locals with an empty operand stack") {
  AbstractState st(2, 4, true);
  auto s = st.snapshot();
  CHECK(s.height == 2);
  CHECK(s.slots.size() == 2);
}

TEST_CASE("snapshots are unaffected by later mutation") {
  AbstractState st(2, 4, true);
  st.slot(0).has_konst = true;
  st.slot(0).konst = 9;
  auto s = st.snapshot();
  st.slot(0).konst = 10;
  st.push(I32);
  CHECK(s.height == 2);
  CHECK(s.slots[0].konst == 9);
}

TEST_CASE("snapshot round-trips a register binding") {
  AbstractState st(2, 4, true);
  st.slot(0).stored = true;
  st.slot(1).stored = true;
  st.bind(1, 3);
  auto s = st.snapshot();
  st.unbind_all();
  CHECK(st.reg_free(3));
  st.restore(s);
  CHECK(st.slot(1).reg == 3);
  REQUIRE(st.holders(3).size() == 1);
  CHECK(st.holders(3)[0] == 1);
  CHECK(st.consistent());
}

TEST_CASE("without multi_reg a shared register is inconsistent") {
  AbstractState st(2, 4, false);
  st.slot(0).stored = true;
  st.slot(1).stored = true;
  st.bind(0, 2);
  CHECK(st.consistent());
  st.bind(1, 2);
  CHECK(st.holders(2).size() == 2);
  CHECK_FALSE(st.consistent());
  AbstractState multi(2, 4, true);
  multi.slot(0).stored = true;
  multi.slot(1).stored = true;
  multi.bind(0, 2);
  multi.bind(1, 2);
  CHECK(multi.consistent());
}

TEST_CASE("parameters arrive in memory and declared locals start as constants") {
  auto bytes = single({I32, I32}, I32, {I64, REF}, [](CodeBuilder& c) {
    c.local_get(2).op(Opcode::I32WrapI64).local_get(0).op(Opcode::I32Add);
    c.local_get(3).op(Opcode::RefIsNull).op(Opcode::I32Add);
  });
  auto cf = compile_last(bytes, compiler::CompilerConfig::allopt());
  // i64 local 0 and null ref fold away: (0 + p0) + 1 needs only p0 from memory.
  CHECK(count_ops(cf, VOp::LoadSlot) == 1);
  CHECK(count_ops(cf, VOp::StoreSlot) == 0);
  CHECK(count_ops(cf, VOp::StoreSlotImm) == 0);
  auto o = run(bytes, runtime::Mode::Jit, {}, {TypedValue::i32(41), TypedValue::i32(0)});
  CHECK(*o.value == TypedValue::i32(42));
}

TEST_CASE("merge of equal constants keeps the constant and emits no code") {
  auto bytes = single({I32}, I32, {}, [](CodeBuilder& c) {
    c.local_get(0).if_(I32).i32_const(1).else_().i32_const(1).end();
    c.i32_const(1).op(Opcode::I32Add);
  });
  auto cf = compile_last(bytes, compiler::CompilerConfig::allopt());
  // The merged value stays 1, so the add folds to a single mov #2 at return.
  CHECK(count_ops(cf, VOp::MovRI) == 1);
  CHECK(count_ops(cf, VOp::Alu) + count_ops(cf, VOp::AluImm) == 0);
  for (int32_t p : {0, 1}) {
    auto a = run(bytes, runtime::Mode::Interp, {}, {TypedValue::i32(p)});
    auto b = run(bytes, runtime::Mode::Jit, {}, {TypedValue::i32(p)});
    CHECK(a == b);
    CHECK(*b.value == TypedValue::i32(2));
  }
}

TEST_CASE("merge of different constants materializes into one register") {
  auto bytes = single({I32}, I32, {}, [](CodeBuilder& c) {
    c.local_get(0).if_(I32).i32_const(1).else_().i32_const(2).end();
  });
  auto cf = compile_last(bytes, compiler::CompilerConfig::allopt());
  std::vector<visa::Instr> movs;
  for (const auto& i : cf.code.instrs())
    if (i.op == VOp::MovRI) movs.push_back(i);
  REQUIRE(movs.size() == 2);
  CHECK(movs[0].a == movs[1].a);
  CHECK(movs[0].imm != movs[1].imm);
  // At most the return move.
  CHECK(count_ops(cf, VOp::MovRR) <= 1);
  CHECK(count_ops(cf, VOp::StoreSlot) + count_ops(cf, VOp::StoreSlotImm) == 0);
  for (int32_t p : {0, 1}) {
    auto a = run(bytes, runtime::Mode::Interp, {}, {TypedValue::i32(p)});
    CHECK(a == run(bytes, runtime::Mode::Jit, {}, {TypedValue::i32(p)}));
  }
}

TEST_CASE("branch from unreachable code leaves the merge state alone") {
  auto base = single({I32}, I32, {}, [](CodeBuilder& c) {
    c.block(I32).i32_const(3).end();
  });
  auto dead = single({I32}, I32, {}, [](CodeBuilder& c) {
    c.block(I32).i32_const(3).br(0).local_get(0).br(0).end();
  });
  auto a = compile_last(base, compiler::CompilerConfig::allopt());
  auto b = compile_last(dead, compiler::CompilerConfig::allopt());
  // Still a single constant result: the dead br did not force a register.
  CHECK(count_ops(b, VOp::LoadSlot) == 0);
  CHECK(count_ops(a, VOp::MovRI) == count_ops(b, VOp::MovRI));
}

TEST_CASE("entering a loop spills constant locals before the header") {
  auto bytes = single({I32}, I32, {I32}, [](CodeBuilder& c) {
    c.loop();
    c.local_get(1).i32_const(1).op(Opcode::I32Add).local_tee(1);
    c.local_get(0).op(Opcode::I32LtU).br_if(0);
    c.end();
    c.local_get(1);
  });
  auto cf = compile_last(bytes, compiler::CompilerConfig::allopt());
  REQUIRE(cf.loops.size() == 1);
  uint32_t header = cf.loops[0].vpc;
  bool spilled = false;
  for (uint32_t k = 0; k < header; k++) {
    const auto& i = cf.code.at(k);
    if ((i.op == VOp::StoreSlotImm || i.op == VOp::StoreSlot) && i.slot == 1) spilled = true;
  }
  CHECK(spilled);
  auto o = run(bytes, runtime::Mode::Jit, {}, {TypedValue::i32(10)});
  CHECK(*o.value == TypedValue::i32(10));
}

TEST_CASE("empty loop body has an empty back edge") {
  auto bytes = single({I32}, std::nullopt, {}, [](CodeBuilder& c) {
    c.loop().local_get(0).br_if(0).end();
  });
  auto cf = compile_last(bytes, compiler::CompilerConfig::allopt());
  uint32_t header = cf.loops.at(0).vpc;
  // Header: reload the condition, then one fused compare-and-branch back.
  uint32_t k = header;
  while (k < cf.code.size() && cf.code.at(k).op == VOp::LoadSlot) k++;
  REQUIRE(k < cf.code.size());
  const auto& i = cf.code.at(k);
  CHECK((i.op == VOp::BrCCImm || i.op == VOp::BrCC));
  CHECK(i.target == header);
  CHECK(k - header <= 1);
}

TEST_CASE("loop snapshots are released at the end of the loop") {
  auto nested = [](uint32_t siblings) {
    return single({I32}, std::nullopt, {}, [=](CodeBuilder& c) {
      for (uint32_t k = 0; k < siblings; k++) {
        c.loop().loop().local_get(0).br_if(0).end().local_get(0).br_if(0).end();
      }
    });
  };
  auto one = compile_last(nested(1), compiler::CompilerConfig::allopt());
  auto many = compile_last(nested(20), compiler::CompilerConfig::allopt());
  CHECK(one.max_live_snapshots == 2);
  CHECK(many.max_live_snapshots == 2);
}
