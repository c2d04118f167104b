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

#ifndef SPC_HARNESS_KERNELS_H
#define SPC_HARNESS_KERNELS_H

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace spc::harness {

// Generated stand-in benchmark modules. Each exports a `main` without
// parameters that returns an i32 checksum.
struct Kernel {
  std::string name;
  std::vector<uint8_t> bytes;
  bool loop = true;
};

// `support` adds that many cold utility functions, each called once before
// the kernel proper.
std::vector<uint8_t> arith_loop_kernel(uint32_t iterations, uint32_t support = 0);
std::vector<uint8_t> matmul_kernel(uint32_t n, uint32_t support = 0);
std::vector<uint8_t> prefix_sum_kernel(uint32_t n, uint32_t passes, uint32_t support = 0);
std::vector<uint8_t> bitmix_kernel(uint32_t rounds, uint32_t support = 0);
std::vector<uint8_t> pointer_chase_kernel(uint32_t nodes, uint32_t steps, uint32_t support = 0);
// Straight-line chains of constant arithmetic feeding a few locals.
std::vector<uint8_t> const_heavy_kernel(uint32_t chains, uint32_t support = 0);

inline constexpr uint32_t kSupportFunctions = 48;

std::vector<Kernel> shipped_kernels();

// One function that simply returns, padded to 104 bytes.
std::vector<uint8_t> mnop_module();
// main(i32) -> i32 made of nested blocks, about target_bytes of code.
std::vector<uint8_t> deep_nesting_module(size_t target_bytes);
// (a, b) -> (a + b) * 3 - a with both parameters arriving in frame slots.
std::vector<uint8_t> params_add_mul_module();

}  // namespace spc::harness

#endif  // SPC_HARNESS_KERNELS_H
