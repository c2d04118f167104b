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

#ifndef SPC_RUNTIME_MACHINE_H
#define SPC_RUNTIME_MACHINE_H

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spc/compiler/compiler.h"
#include "spc/runtime/value_stack.h"
#include "spc/wasm/numeric.h"
#include "spc/wasm/validator.h"

namespace spc::runtime {

using wasm::TrapKind;
using wasm::TypedValue;

enum class Mode : uint8_t { Interp, Jit, Tiered };
std::string_view mode_name(Mode m);

class ScanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NoSafepoint : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};
class InvalidLocation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class LinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class AuditFailure : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct MachineOptions {
  Mode mode = Mode::Interp;
  compiler::CompilerConfig config;
  uint32_t hot_threshold = 10;
  uint64_t cost_limit = 0;  // 0: unlimited
  // gc_scan under a config that cannot scan traps with ScanError; otherwise
  // the scan is skipped and logged as such.
  bool strict_scan = true;
  // Frame audits at every safepoint and interpreted instruction.
  bool audit = false;
  uint32_t max_pages = 1024;
  std::ostream* trace = nullptr;
  std::ostream* print = nullptr;
};

struct Outcome {
  enum class Status : uint8_t { Ok, Trap, Limit };
  Status status = Status::Ok;
  std::optional<TypedValue> value;
  TrapKind trap = TrapKind::None;
  uint32_t trap_func = 0;
  uint32_t trap_pc = 0;

  bool ok() const { return status == Status::Ok; }
  bool operator==(const Outcome&) const = default;
};
std::string to_string(const Outcome& o);

struct Root {
  uint32_t frame = 0;  // 0 is the outermost frame
  uint32_t slot = 0;
  uint64_t value = 0;
  bool operator==(const Root&) const = default;
};
using RootSet = std::vector<Root>;

struct HostEvent {
  std::string name;
  std::vector<uint64_t> args;
  std::optional<uint64_t> result;
  bool scanned = false;
  RootSet roots;
  bool operator==(const HostEvent&) const = default;
};

struct Counters {
  uint64_t bytecodes = 0;
  uint64_t instrs_retired = 0;
  uint64_t cost_units = 0;
  uint64_t tag_stores = 0;
  uint64_t slot_stores = 0;
  uint64_t calls = 0;
  uint64_t tier_ups = 0;
  uint64_t tier_downs = 0;

  uint64_t exec_units() const { return bytecodes + cost_units; }
};

enum class SafepointKind : uint8_t { Entry, LoopHeader, CallReturn };
struct SafepointInfo {
  SafepointKind kind = SafepointKind::Entry;
  FrameKind tier = FrameKind::Interp;
  uint32_t func = 0;
  uint32_t pc = 0;
};
// Decides whether the frame switches tier at a safepoint.
using TierPolicy = std::function<bool(const SafepointInfo&)>;

enum class Pause : uint8_t { None, Call, LoopHeader };

// Host-side linkage for one frame on the value stack.
struct Activation {
  uint32_t func = 0;
  size_t fp = 0;
  uint32_t height = 0;    // live slots while paused
  uint32_t pause_pc = 0;  // Wasm pc of the pausing instruction
  Pause pause = Pause::None;
  bool has_resume = false;  // compiled caller: result for r0/x0
  uint64_t resume_bits = 0;

  size_t vfp() const { return fp + kFrameHeaderWords; }
};

struct ExecState;

// Read access to one frame while execution is paused.
class FrameView {
 public:
  FrameView(const ExecState& es, size_t index) : es_(&es), index_(index) {}
  uint32_t func() const;
  FrameKind kind() const;
  uint32_t pc() const;
  uint32_t height() const;
  uint32_t num_locals() const;
  uint64_t value(uint32_t slot) const;
  wasm::Tag tag(uint32_t slot) const;
  std::vector<uint64_t> operands() const;

 private:
  const ExecState* es_;
  size_t index_;
};

using ProbeFn = std::function<void(const FrameView&)>;

// Why a tier's run loop returned control to the machine.
struct Exit {
  enum class Kind : uint8_t { Call, Return, Trap, TierSwitch, Limit } kind = Kind::Return;
  uint32_t callee = 0;
  uint32_t argbase = 0;
  uint64_t value = 0;
  TrapKind trap = TrapKind::None;
  uint32_t pc = 0;
  uint32_t height = 0;
};

// Execution state shared by the interpreter, the emulator and the machine.
struct ExecState {
  const wasm::WasmModule& module;
  MachineOptions opts;
  ValueStack stack;
  std::vector<uint8_t> memory;
  uint32_t max_pages = 0;
  std::vector<uint64_t> globals;
  std::vector<Activation> acts;
  Counters counters;
  std::vector<std::unique_ptr<compiler::CompiledFunction>> compiled;
  std::vector<std::unique_ptr<wasm::TypeMap>> type_maps;
  std::vector<uint32_t> invocations;
  std::vector<bool> force_interp;
  std::vector<bool> deopt;
  std::vector<std::map<uint32_t, std::vector<ProbeFn>>> probes;
  TierPolicy policy;
  uint64_t max_handle = 0;

  ExecState(const wasm::WasmModule& m, MachineOptions o);

  bool over_budget() const { return opts.cost_limit && counters.exec_units() > opts.cost_limit; }
  const compiler::CompiledFunction& compiled_for(uint32_t func);
  const wasm::TypeMap& type_map(uint32_t func);
  uint32_t pages() const { return static_cast<uint32_t>(memory.size() / wasm::kPageSize); }
  // Returns the previous page count, or -1 as u32 on failure.
  uint32_t grow(uint32_t delta);
  // Tier-up check at an interpreted loop header.
  bool want_tier_up(uint32_t func, uint32_t pc, uint64_t hotness);
  // Tier-down check at a compiled loop header.
  bool want_tier_down(uint32_t func, uint32_t pc);
  // Expected static types of the live slots of a paused frame.
  std::vector<wasm::ValType> live_types(size_t index);
  void audit_frame(size_t index);
};

class Machine {
 public:
  explicit Machine(const wasm::WasmModule& module, MachineOptions opts = {});

  const MachineOptions& options() const { return es_.opts; }
  // Sets up memory, globals and data, then runs the start function if any.
  Outcome instantiate();
  Outcome invoke(uint32_t func, std::span<const TypedValue> args);
  // Instantiates and runs the entry function (unless it is the start function).
  Outcome run_main(std::span<const TypedValue> args);

  void insert_probe(uint32_t func, uint32_t pc, ProbeFn fn);
  void set_tier_policy(TierPolicy p) { es_.policy = std::move(p); }
  void set_host_hook(std::function<void(Machine&, const HostEvent&)> hook) { host_hook_ = std::move(hook); }

  RootSet scan_roots();
  // Compiles every defined function not compiled yet.
  void compile_all();
  const compiler::CompiledFunction& compiled(uint32_t func) { return es_.compiled_for(func); }
  compiler::StaticMetrics static_metrics() const;

  const Counters& counters() const { return es_.counters; }
  const std::vector<HostEvent>& events() const { return events_; }
  const std::vector<uint8_t>& memory() const { return es_.memory; }
  const std::vector<uint64_t>& globals() const { return es_.globals; }
  size_t frame_count() const { return es_.acts.size(); }
  FrameView frame(size_t i) const { return FrameView(es_, i); }
  const ValueStack& stack() const { return es_.stack; }
  uint32_t max_frames_seen() const { return max_frames_; }

  // Tier transitions of a paused frame.
  void tier_up(size_t index);
  void tier_down(size_t index);

 private:
  ExecState es_;
  std::vector<HostEvent> events_;
  std::function<void(Machine&, const HostEvent&)> host_hook_;
  bool instantiated_ = false;
  uint32_t max_frames_ = 0;

  FrameKind choose_kind(uint32_t func);
  void push_frame(uint32_t func, FrameKind kind, const uint64_t* args, const uint8_t* arg_tags);
  std::optional<Outcome> call_host(uint32_t import, size_t caller, uint32_t argbase);
  void deliver(size_t index, std::optional<TypedValue> value);
  Outcome trap_outcome(TrapKind k, uint32_t func, uint32_t pc, size_t base);
  Outcome run_loop(size_t base);
};

}  // namespace spc::runtime

#endif  // SPC_RUNTIME_MACHINE_H
