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

#ifndef SPC_WASM_ERRORS_H
#define SPC_WASM_ERRORS_H

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace spc::wasm {

class MalformedModule : public std::runtime_error {
 public:
  MalformedModule(size_t offset, std::string reason)
      : std::runtime_error("malformed module at offset " + std::to_string(offset) + ": " + reason),
        offset_(offset),
        reason_(std::move(reason)) {}

  size_t offset() const { return offset_; }
  const std::string& reason() const { return reason_; }

 private:
  size_t offset_;
  std::string reason_;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(uint32_t func, uint32_t pc, std::string reason)
      : std::runtime_error("validation failed in func " + std::to_string(func) + " at pc " +
                           std::to_string(pc) + ": " + reason),
        func_(func),
        pc_(pc),
        reason_(std::move(reason)) {}

  uint32_t func() const { return func_; }
  uint32_t pc() const { return pc_; }
  const std::string& reason() const { return reason_; }

 private:
  uint32_t func_;
  uint32_t pc_;
  std::string reason_;
};

class BuilderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace spc::wasm

#endif  // SPC_WASM_ERRORS_H
