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

#ifndef SPC_INTERP_INTERPRETER_H
#define SPC_INTERP_INTERPRETER_H

#include <cstddef>

#include "spc/runtime/machine.h"

namespace spc::interp {

// Runs the interpreted frame acts[index] in place over the module bytes
// until it calls, returns, traps, requests a tier switch or runs out of
// budget. The frame's ip/stp words and the activation are left describing
// where it paused.
runtime::Exit run(runtime::ExecState& es, size_t index);

}  // namespace spc::interp

#endif  // SPC_INTERP_INTERPRETER_H
