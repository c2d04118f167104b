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

#ifndef SPC_HARNESS_M0_H
#define SPC_HARNESS_M0_H

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace spc::harness {

class NoEntry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Returns m0: the module with `if (opaque) return;` inserted at the start of
// its entry function. The predicate reads a new mutable global initialized
// to 1, so no config can fold it; the rest of the code is kept intact.
std::vector<uint8_t> make_m0(std::span<const uint8_t> bytes);

}  // namespace spc::harness

#endif  // SPC_HARNESS_M0_H
