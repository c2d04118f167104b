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
#include "spc/harness/kernels.h"
#include "spc/wasm/errors.h"
#include "spc/wasm/numeric.h"

using namespace spc;
using namespace spc::test;

TEST_CASE("minimal module decodes to one empty function") {
  auto bytes = harness::mnop_module();
  CHECK(bytes.size() == 104);
  auto m = load(bytes);
  REQUIRE(m.functions.size() == 1);
  const auto& f = m.functions[0];
  // Only the terminating end remains after the locals vector.
  CHECK(f.body_size - f.code_offset == 1);
  CHECK(m.start == std::optional<uint32_t>(0));
}

TEST_CASE("empty input is malformed at offset 0") {
  try {
    wasm::decode_module(std::vector<uint8_t>{});
    FAIL("expected MalformedModule");
  } catch (const wasm::MalformedModule& e) {
    CHECK(e.offset() == 0);
  }
}

TEST_CASE("function referencing an undeclared type is malformed") {
  std::vector<uint8_t> b = {0x00, 0x61, 0x73, 0x6d, 0x01, 0x00, 0x00, 0x00,
                            0x01, 0x04, 0x01, 0x60, 0x00, 0x00,   // one type: () -> ()
                            0x03, 0x02, 0x01, 0x07,               // function uses type 7
                            0x0a, 0x04, 0x01, 0x02, 0x00, 0x0b};  // body: end
  CHECK_THROWS_AS(wasm::decode_module(b), wasm::MalformedModule);
}

TEST_CASE("truncated module is malformed") {
  auto bytes = harness::params_add_mul_module();
  bytes.resize(bytes.size() - 3);
  CHECK_THROWS_AS(wasm::decode_module(bytes), wasm::MalformedModule);
}

TEST_CASE("const drop validates with stack height 1") {
  auto m = load(single({}, std::nullopt, {}, [](CodeBuilder& c) { c.i32_const(1).drop(); }));
  CHECK(m.functions[0].max_stack_height == 1);
  CHECK(m.functions[0].sidetable.empty());
}

TEST_CASE("drop on an empty stack is a validation error") {
  auto bytes = single({}, std::nullopt, {}, [](CodeBuilder& c) { c.drop(); });
  auto m = wasm::decode_module(bytes);
  CHECK_THROWS_AS(wasm::validate(m), wasm::ValidationError);
}

TEST_CASE("type mismatches are validation errors") {
  auto bad_add = single({}, I32, {}, [](CodeBuilder& c) { c.i32_const(1).i64_const(2).op(Opcode::I32Add); });
  auto m1 = wasm::decode_module(bad_add);
  CHECK_THROWS_AS(wasm::validate(m1), wasm::ValidationError);
  auto bad_result = single({}, I32, {}, [](CodeBuilder& c) { c.f32_const(1.0f); });
  auto m2 = wasm::decode_module(bad_result);
  CHECK_THROWS_AS(wasm::validate(m2), wasm::ValidationError);
  auto bad_label = single({}, std::nullopt, {}, [](CodeBuilder& c) { c.block().br(2).end(); });
  auto m3 = wasm::decode_module(bad_label);
  CHECK_THROWS_AS(wasm::validate(m3), wasm::ValidationError);
}

TEST_CASE("br out of a block targets the pc after its end") {
  // pc 0: locals vector; 1: block 0x40; 3: br 0; 5: end; 6: end
  auto m = load(single({}, std::nullopt, {}, [](CodeBuilder& c) { c.block().br(0).end(); }));
  const auto& f = m.functions[0];
  CHECK(f.code_offset == 1);
  REQUIRE(f.sidetable.size() == 1);
  const auto& e = f.sidetable[0];
  CHECK(e.branch_pc == 3);
  CHECK(e.target_pc == 6);
  CHECK(e.val_count == 0);
  CHECK(e.pop_count == 0);
  CHECK(e.target_stp == 1);
}

TEST_CASE("br to a loop targets the loop header and carries no values") {
  // The header itself is the target so every back edge passes the hotness tick.
  auto m = load(single({I32}, std::nullopt, {}, [](CodeBuilder& c) {
    c.loop().local_get(0).br_if(0).end();
  }));
  const auto& f = m.functions[0];
  REQUIRE(f.sidetable.size() == 1);
  CHECK(f.sidetable[0].target_pc == f.code_offset);
  CHECK(f.sidetable[0].target_stp == 0);
}

TEST_CASE("branch with a value records val and pop counts") {
  auto m = load(single({}, I32, {}, [](CodeBuilder& c) {
    c.block(I32).i32_const(1).i32_const(2).br(0).end();
  }));
  const auto& e = m.functions[0].sidetable.at(0);
  CHECK(e.val_count == 1);
  CHECK(e.pop_count == 1);
}

TEST_CASE("builder module returning 5 executes to 5") {
  auto bytes = single({}, I32, {}, [](CodeBuilder& c) { c.i32_const(5); });
  auto o = run(bytes, runtime::Mode::Interp);
  REQUIRE(o.ok());
  CHECK(*o.value == TypedValue::i32(5));
}

TEST_CASE("minimal module runs as a no-op") {
  auto o = run(harness::mnop_module(), runtime::Mode::Interp);
  CHECK(o.ok());
  CHECK(!o.value);
}

TEST_CASE("locals are expanded per slot") {
  auto m = load(single({I32, F64}, std::nullopt, {I64, REF, REF}, [](CodeBuilder&) {}));
  const auto& f = m.functions[0];
  CHECK(f.num_params == 2);
  CHECK(f.num_locals == 5);
  CHECK(f.local_types == std::vector<ValType>{I32, F64, I64, REF, REF});
}

TEST_CASE("numeric semantics") {
  using wasm::TrapKind;
  auto binop = [](ValType t, Opcode op, TypedValue a, TypedValue b) {
    return run(single({}, t, {}, [&](CodeBuilder& c) { c.const_of(a).const_of(b).op(op); }), runtime::Mode::Interp);
  };
  CHECK(binop(I32, Opcode::I32DivS, TypedValue::i32(1), TypedValue::i32(0)).trap == TrapKind::DivByZero);
  CHECK(binop(I32, Opcode::I32DivS, TypedValue::i32(INT32_MIN), TypedValue::i32(-1)).trap ==
        TrapKind::IntegerOverflow);
  CHECK(*binop(I32, Opcode::I32RemS, TypedValue::i32(INT32_MIN), TypedValue::i32(-1)).value == TypedValue::i32(0));
  CHECK(*binop(I32, Opcode::I32Shl, TypedValue::i32(1), TypedValue::i32(33)).value == TypedValue::i32(2));
  CHECK(*binop(I32, Opcode::I32ShrS, TypedValue::i32(-8), TypedValue::i32(1)).value == TypedValue::i32(-4));
  CHECK(*binop(I64, Opcode::I64DivU, TypedValue::i64(-1), TypedValue::i64(2)).value ==
        TypedValue::i64(0x7fffffffffffffffll));
  CHECK(*binop(I32, Opcode::I32LtU, TypedValue::i32(-1), TypedValue::i32(1)).value == TypedValue::i32(0));
  auto nan = binop(F64, Opcode::F64Add, TypedValue::f64(0.0), TypedValue{F64, wasm::kCanonicalNaN64 | 1});
  CHECK(nan.value->bits == wasm::kCanonicalNaN64);
  auto trunc = run(single({}, I32, {}, [](CodeBuilder& c) { c.f64_const(3e9).op(Opcode::I32TruncF64S); }),
                   runtime::Mode::Interp);
  CHECK(trunc.trap == TrapKind::TruncError);
  auto trunc_ok = run(single({}, I32, {}, [](CodeBuilder& c) { c.f64_const(-2.9).op(Opcode::I32TruncF64S); }),
                      runtime::Mode::Interp);
  CHECK(*trunc_ok.value == TypedValue::i32(-2));
}
