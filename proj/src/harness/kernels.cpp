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

#include "spc/harness/kernels.h"

#include <algorithm>

#include "spc/wasm/builder.h"

namespace spc::harness {

using wasm::CodeBuilder;
using wasm::ModuleBuilder;
using wasm::Opcode;
using wasm::ValType;

namespace {

constexpr ValType I32 = ValType::I32;
constexpr ValType I64 = ValType::I64;

// for (i = 0; i < n; i++) body, with i in local `i`.
template <typename Body>
void counted_loop(CodeBuilder& c, uint32_t i, uint32_t n, Body body) {
  c.i32_const(0).local_set(i);
  c.loop();
  body();
  c.local_get(i).i32_const(1).op(Opcode::I32Add).local_tee(i);
  c.i32_const(static_cast<int32_t>(n)).op(Opcode::I32LtU).br_if(0);
  c.end();
}

// Cold utility functions, each called once from main's prologue, so a
// module carries code besides its hot loop.
void support_library(ModuleBuilder& mb, CodeBuilder& main, uint32_t count) {
  if (count == 0) return;
  uint32_t type = mb.add_type({I32}, I32);
  for (uint32_t k = 0; k < count; k++) {
    auto& g = mb.add_function(type);
    uint32_t i = g.add_locals(2, I32);
    uint32_t x = i + 1;
    uint32_t y = g.add_locals(1, I64);
    auto& c = g.code();
    auto k32 = [&](uint32_t v) { return static_cast<int32_t>(v * 2654435761u + k * 40503u); };
    c.local_get(0).i32_const(k32(1)).op(Opcode::I32Xor).local_set(x);
    counted_loop(c, i, 8, [&] {
      for (uint32_t r = 0; r < k % 4 + 2; r++) {
        c.local_get(x).i32_const(k32(r + 2) | 1).op(Opcode::I32Mul).local_get(i).op(Opcode::I32Add);
        c.local_get(x).i32_const(static_cast<int32_t>((k + r) % 29 + 1)).op(Opcode::I32ShrU);
        c.op(Opcode::I32Xor).local_set(x);
      }
      c.local_get(y).local_get(x).op(Opcode::I64ExtendI32U).i64_const(k32(7)).op(Opcode::I64Mul);
      c.op(Opcode::I64Add).local_set(y);
      c.local_get(x).i32_const(1).op(Opcode::I32And).if_();
      c.local_get(x).i32_const(k32(11)).op(Opcode::I32Add).local_set(x);
      c.else_();
      c.local_get(x).i32_const(k32(13)).op(Opcode::I32Xor).local_set(x);
      c.end();
      c.local_get(x).i32_const(0).op(Opcode::I32LtS).if_();
      c.local_get(y).local_get(y).i64_const(7).op(Opcode::I64ShrU).op(Opcode::I64Xor).local_set(y);
      c.end();
    });
    c.local_get(y).op(Opcode::I32WrapI64).local_get(x).op(Opcode::I32Xor).end();
    main.i32_const(static_cast<int32_t>(k)).call(g.index()).drop();
  }
}

std::vector<uint8_t> finish(ModuleBuilder& mb, uint32_t main) {
  mb.export_func("main", main);
  return mb.build();
}

}  // namespace

std::vector<uint8_t> arith_loop_kernel(uint32_t iterations, uint32_t support) {
  ModuleBuilder mb;
  auto& f = mb.add_function(mb.add_type({}, I32));
  uint32_t i = f.add_locals(1, I32);
  uint32_t acc = f.add_locals(1, I32);
  auto& c = f.code();
  support_library(mb, c, support);
  counted_loop(c, i, iterations, [&] {
    c.local_get(acc).i32_const(31).op(Opcode::I32Mul).local_get(i).op(Opcode::I32Add);
    c.local_get(i).i32_const(3).op(Opcode::I32ShrU).op(Opcode::I32Xor).local_set(acc);
  });
  c.local_get(acc).end();
  return finish(mb, 0);
}

std::vector<uint8_t> matmul_kernel(uint32_t n, uint32_t support) {
  ModuleBuilder mb;
  uint32_t words = n * n;
  uint32_t bytes = 3 * words * 4;
  mb.set_memory(std::max<uint32_t>(1, (bytes + 65535) / 65536));
  auto& f = mb.add_function(mb.add_type({}, I32));
  uint32_t i = f.add_locals(1, I32);
  uint32_t j = f.add_locals(1, I32);
  uint32_t k = f.add_locals(1, I32);
  uint32_t sum = f.add_locals(1, I32);
  uint32_t a = 0, b = words * 4, out = 2 * words * 4;
  auto& c = f.code();
  support_library(mb, c, support);
  counted_loop(c, i, words, [&] {
    c.local_get(i).i32_const(2).op(Opcode::I32Shl);
    c.local_get(i).i32_const(3).op(Opcode::I32Mul).i32_const(1).op(Opcode::I32Add);
    c.mem(Opcode::I32Store, a);
    c.local_get(i).i32_const(2).op(Opcode::I32Shl);
    c.local_get(i).i32_const(5).op(Opcode::I32Xor);
    c.mem(Opcode::I32Store, b);
  });
  counted_loop(c, i, n, [&] {
    counted_loop(c, j, n, [&] {
      c.i32_const(0).local_set(sum);
      // k advances by 4 with the body unrolled.
      c.i32_const(0).local_set(k);
      c.loop();
      for (uint32_t u = 0; u < 4; u++) {
        c.local_get(sum);
        c.local_get(i).i32_const(static_cast<int32_t>(n)).op(Opcode::I32Mul).local_get(k).op(Opcode::I32Add);
        c.i32_const(2).op(Opcode::I32Shl).mem(Opcode::I32Load, a + 4 * u);
        c.local_get(k).i32_const(static_cast<int32_t>(u)).op(Opcode::I32Add);
        c.i32_const(static_cast<int32_t>(n)).op(Opcode::I32Mul).local_get(j).op(Opcode::I32Add);
        c.i32_const(2).op(Opcode::I32Shl).mem(Opcode::I32Load, b);
        c.op(Opcode::I32Mul).op(Opcode::I32Add).local_set(sum);
      }
      c.local_get(k).i32_const(4).op(Opcode::I32Add).local_tee(k);
      c.i32_const(static_cast<int32_t>(n)).op(Opcode::I32LtU).br_if(0);
      c.end();
      c.local_get(i).i32_const(static_cast<int32_t>(n)).op(Opcode::I32Mul).local_get(j).op(Opcode::I32Add);
      c.i32_const(2).op(Opcode::I32Shl).local_get(sum).mem(Opcode::I32Store, out);
    });
  });
  c.i32_const(0).local_set(sum);
  counted_loop(c, i, words, [&] {
    c.local_get(sum).i32_const(7).op(Opcode::I32Mul);
    c.local_get(i).i32_const(2).op(Opcode::I32Shl).mem(Opcode::I32Load, out);
    c.op(Opcode::I32Add).local_set(sum);
  });
  c.local_get(sum).end();
  return finish(mb, 0);
}

std::vector<uint8_t> prefix_sum_kernel(uint32_t n, uint32_t passes, uint32_t support) {
  ModuleBuilder mb;
  mb.set_memory(std::max<uint32_t>(1, (n * 4 + 65535) / 65536));
  auto& f = mb.add_function(mb.add_type({}, I32));
  uint32_t i = f.add_locals(1, I32);
  uint32_t p = f.add_locals(1, I32);
  uint32_t addr = f.add_locals(1, I32);
  auto& c = f.code();
  support_library(mb, c, support);
  counted_loop(c, i, n, [&] {
    c.local_get(i).i32_const(2).op(Opcode::I32Shl);
    c.local_get(i).i32_const(7).op(Opcode::I32Mul).i32_const(255).op(Opcode::I32And);
    c.mem(Opcode::I32Store);
  });
  counted_loop(c, p, passes, [&] {
    c.i32_const(1).local_set(i);
    c.loop();
    c.local_get(i).i32_const(2).op(Opcode::I32Shl).local_tee(addr);
    c.local_get(addr).mem(Opcode::I32Load);
    c.local_get(addr).i32_const(4).op(Opcode::I32Sub).mem(Opcode::I32Load);
    c.op(Opcode::I32Add).mem(Opcode::I32Store);
    c.local_get(i).i32_const(1).op(Opcode::I32Add).local_tee(i);
    c.i32_const(static_cast<int32_t>(n)).op(Opcode::I32LtU).br_if(0);
    c.end();
  });
  c.i32_const(static_cast<int32_t>((n - 1) * 4)).mem(Opcode::I32Load).end();
  return finish(mb, 0);
}

std::vector<uint8_t> bitmix_kernel(uint32_t rounds, uint32_t support) {
  ModuleBuilder mb;
  auto& f = mb.add_function(mb.add_type({}, I32));
  uint32_t i = f.add_locals(1, I32);
  uint32_t x = f.add_locals(1, I64);
  uint32_t acc = f.add_locals(1, I64);
  auto& c = f.code();
  support_library(mb, c, support);
  c.i64_const(0x9e3779b97f4a7c15ll).local_set(x);
  counted_loop(c, i, rounds, [&] {
    auto step = [&](Opcode shift, int64_t amount) {
      c.local_get(x).local_get(x).i64_const(amount).op(shift).op(Opcode::I64Xor).local_set(x);
    };
    step(Opcode::I64Shl, 13);
    step(Opcode::I64ShrU, 7);
    step(Opcode::I64Shl, 17);
    c.local_get(acc).local_get(x).i64_const(0x2545f4914f6cdd1dll).op(Opcode::I64Mul);
    c.local_get(i).op(Opcode::I64ExtendI32U).op(Opcode::I64Xor).op(Opcode::I64Add).local_set(acc);
  });
  c.local_get(acc).local_get(acc).i64_const(32).op(Opcode::I64ShrU).op(Opcode::I64Xor);
  c.op(Opcode::I32WrapI64).end();
  return finish(mb, 0);
}

std::vector<uint8_t> pointer_chase_kernel(uint32_t nodes, uint32_t steps, uint32_t support) {
  ModuleBuilder mb;
  mb.set_memory(std::max<uint32_t>(1, (nodes * 8 + 65535) / 65536));
  auto& f = mb.add_function(mb.add_type({}, I32));
  uint32_t i = f.add_locals(1, I32);
  uint32_t p = f.add_locals(1, I32);
  uint32_t sum = f.add_locals(1, I32);
  auto& c = f.code();
  support_library(mb, c, support);
  // node i: next index at +0, payload at +4; next = (i * 389 + 1) mod nodes.
  counted_loop(c, i, nodes, [&] {
    c.local_get(i).i32_const(3).op(Opcode::I32Shl);
    c.local_get(i).i32_const(389).op(Opcode::I32Mul).i32_const(1).op(Opcode::I32Add);
    c.i32_const(static_cast<int32_t>(nodes)).op(Opcode::I32RemU).mem(Opcode::I32Store);
    c.local_get(i).i32_const(3).op(Opcode::I32Shl);
    c.local_get(i).local_get(i).op(Opcode::I32Mul).mem(Opcode::I32Store, 4);
  });
  counted_loop(c, i, steps, [&] {
    c.local_get(sum).local_get(p).i32_const(3).op(Opcode::I32Shl).mem(Opcode::I32Load, 4).op(Opcode::I32Add);
    c.local_set(sum);
    c.local_get(p).i32_const(3).op(Opcode::I32Shl).mem(Opcode::I32Load).local_set(p);
  });
  c.local_get(sum).local_get(p).op(Opcode::I32Xor).end();
  return finish(mb, 0);
}

std::vector<uint8_t> const_heavy_kernel(uint32_t chains, uint32_t support) {
  ModuleBuilder mb;
  auto& f = mb.add_function(mb.add_type({}, I32));
  uint32_t i = f.add_locals(1, I32);
  uint32_t x = f.add_locals(4, I32);
  auto& c = f.code();
  support_library(mb, c, support);
  counted_loop(c, i, 64, [&] {
    for (uint32_t k = 0; k < chains; k++) {
      int32_t a = static_cast<int32_t>(k * 7 + 3), b = static_cast<int32_t>(k % 13 + 2);
      uint32_t dst = x + k % 4;
      c.local_get(dst);
      c.i32_const(a).i32_const(b).op(Opcode::I32Mul);
      c.i32_const(static_cast<int32_t>(k)).op(Opcode::I32Add);
      c.i32_const(static_cast<int32_t>(k % 5)).op(Opcode::I32Shl);
      c.i32_const(0x55).op(Opcode::I32Xor);
      c.op(Opcode::I32Add).local_set(dst);
    }
  });
  c.local_get(x).local_get(x + 1).op(Opcode::I32Add).local_get(x + 2).op(Opcode::I32Xor);
  c.local_get(x + 3).op(Opcode::I32Sub).end();
  return finish(mb, 0);
}

std::vector<Kernel> shipped_kernels() {
  return {
      {"arith-loop", arith_loop_kernel(1000000, kSupportFunctions), true},
      {"matmul", matmul_kernel(24, kSupportFunctions), true},
      {"prefix-sums", prefix_sum_kernel(4096, 8, kSupportFunctions), true},
      {"bitmix", bitmix_kernel(50000, kSupportFunctions), true},
      {"pointer-chase", pointer_chase_kernel(4099, 50000, kSupportFunctions), true},
      {"const-heavy", const_heavy_kernel(64, kSupportFunctions), true},
  };
}

std::vector<uint8_t> mnop_module() {
  constexpr size_t kSize = 104;
  auto build = [](size_t pad) {
    ModuleBuilder mb;
    auto& f = mb.add_function(mb.add_type({}, std::nullopt));
    f.code().end();
    mb.export_func("main", 0);
    mb.set_start(0);
    mb.add_custom("name", std::vector<uint8_t>(pad, 0));
    return mb.build();
  };
  size_t pad = kSize - build(0).size();
  auto out = build(pad);
  // The section length prefix may grow by one byte past 127.
  if (out.size() != kSize) out = build(pad - (out.size() - kSize));
  return out;
}

std::vector<uint8_t> deep_nesting_module(size_t target_bytes) {
  ModuleBuilder mb;
  auto& f = mb.add_function(mb.add_type({I32}, I32));
  uint32_t t = f.add_locals(2, I32);
  auto& c = f.code();
  constexpr size_t kLevelBytes = 16;
  size_t levels = std::max<size_t>(1, target_bytes / kLevelBytes);
  size_t depth = std::min<size_t>(levels, 1000);
  size_t done = 0;
  while (done < levels) {
    size_t d = std::min(depth, levels - done);
    for (size_t k = 0; k < d; k++) c.block();
    for (size_t k = 0; k < d; k++) {
      c.local_get(0).i32_const(static_cast<int32_t>(k % 61)).op(Opcode::I32Add).local_tee(t);
      c.local_get(t + 1).op(Opcode::I32Xor).local_set(0);
      c.local_get(t).br_if(0);
      c.end();
    }
    done += d;
  }
  c.local_get(0).end();
  return finish(mb, 0);
}

std::vector<uint8_t> params_add_mul_module() {
  ModuleBuilder mb;
  auto& f = mb.add_function(mb.add_type({I32, I32}, I32));
  f.code().local_get(0).local_get(1).op(Opcode::I32Add).i32_const(3).op(Opcode::I32Mul);
  f.code().local_get(0).op(Opcode::I32Sub).end();
  return finish(mb, 0);
}

}  // namespace spc::harness
