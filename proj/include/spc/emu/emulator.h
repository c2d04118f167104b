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

#ifndef SPC_EMU_EMULATOR_H
#define SPC_EMU_EMULATOR_H

#include <cstddef>

#include "spc/runtime/machine.h"

namespace spc::emu {

// Executes the compiled frame acts[index] from its resume index. Registers
// do not survive an exit; a pending call result is delivered in r0/x0.
runtime::Exit run(runtime::ExecState& es, size_t index);

}  // namespace spc::emu

#endif  // SPC_EMU_EMULATOR_H
