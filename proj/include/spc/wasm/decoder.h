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

#ifndef SPC_WASM_DECODER_H
#define SPC_WASM_DECODER_H

#include <cstdint>
#include <span>
#include <vector>

#include "spc/wasm/module.h"

namespace spc::wasm {

// Decodes module structure. Function bodies are located but not read;
// validate() reads them.
WasmModule decode_module(std::span<const uint8_t> bytes);
WasmModule decode_module(std::vector<uint8_t> bytes);

}  // namespace spc::wasm

#endif  // SPC_WASM_DECODER_H
