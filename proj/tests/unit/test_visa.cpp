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

#include "spc/visa/code_buffer.h"

using namespace spc::visa;

namespace {

Instr mov_ri(Reg a, int64_t imm) {
  Instr i;
  i.op = VOp::MovRI;
  i.a = a;
  i.imm = imm;
  return i;
}

}  // namespace

TEST_CASE("emit appends one instruction") {
  CodeBuffer b;
  b.emit(mov_ri(kR0, 5));
  CHECK(b.size() == 1);
}

TEST_CASE("forward branch resolves after bind and finalize") {
  CodeBuffer b;
  Label l = b.new_label();
  Instr j;
  j.op = VOp::Jmp;
  j.target = l;
  b.emit(j);
  b.emit(mov_ri(kR0, 1));
  b.bind(l);
  b.emit(mov_ri(kR0, 2));
  b.finalize();
  CHECK(b.at(0).target == 2);
}

TEST_CASE("finalize with an unbound label throws") {
  CodeBuffer b;
  Instr j;
  j.op = VOp::Jmp;
  j.target = b.new_label();
  b.emit(j);
  CHECK_THROWS_AS(b.finalize(), FinalizeError);
}

TEST_CASE("disassembly format") {
  CodeBuffer b;
  b.set_src_pc(2);
  b.emit(mov_ri(kR0, 5));
  Instr st;
  st.op = VOp::StoreSlot;
  st.a = kR0;
  st.slot = 3;
  b.emit(st);
  b.finalize();
  std::string text = disassemble(b);
  CHECK(text.starts_with("0000: mov r0, #5 ; wasm@2\n"));
  CHECK(text.find("0001: store.slot r0, [vfp+3] ; wasm@2") != std::string::npos);
}

TEST_CASE("empty buffer disassembles to empty text") {
  CodeBuffer b;
  b.finalize();
  CHECK(disassemble(b).empty());
}

TEST_CASE("register names and cost model") {
  CHECK(reg_name(kR0) == "r0");
  CHECK(reg_name(kRT) == "rt");
  CHECK(reg_name(kX0 + 3) == "x3");
  CHECK(reg_name(kXT) == "xt");
  CHECK(instr_cost(VOp::MemLoad) == 2);
  CHECK(instr_cost(VOp::Call) == 5);
  CHECK(instr_cost(VOp::HostCall) == 5);
  CHECK(instr_cost(VOp::Alu) == 1);
}

TEST_CASE("retraction stops at bound labels") {
  CodeBuffer b;
  b.emit(mov_ri(kR0, 1));
  b.bind(b.new_label());
  CHECK(b.retractable() == 0);
  b.emit(mov_ri(kR0, 2));
  b.emit(mov_ri(kR0, 3));
  CHECK(b.retractable() == 2);
  b.pop_back();
  CHECK(b.size() == 2);
}
