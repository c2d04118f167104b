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

#include "spc/harness/fuzz.h"

#include <algorithm>
#include <atomic>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "spc/wasm/decoder.h"

namespace spc::harness {

using compiler::CompilerConfig;
using compiler::Tagging;
using runtime::Mode;
using runtime::Outcome;

namespace {

constexpr uint64_t kOracleLimit = 2'000'000;
constexpr uint64_t kJitLimit = 50'000'000;

// Compiled frames must match the interpreter's frame layout and stay inside it.
std::optional<std::string> check_frames(const wasm::WasmModule& m) {
  for (uint32_t f = m.num_imports(); f < m.num_functions(); f++) {
    auto cf = compiler::compile_function(m, f, CompilerConfig::allopt());
    uint32_t slots = m.defined(f).frame_slots();
    if (cf.frame_slots != slots)
      return "func " + std::to_string(f) + ": frame " + std::to_string(cf.frame_slots) + " slots, expected " +
             std::to_string(slots);
    for (const visa::Instr& i : cf.code.instrs()) {
      bool bad = false;
      switch (i.op) {
        case visa::VOp::LoadSlot:
        case visa::VOp::StoreSlot:
        case visa::VOp::StoreSlotImm:
        case visa::VOp::StoreTag: bad = i.slot >= slots; break;
        case visa::VOp::Call:
        case visa::VOp::HostCall:
          bad = i.slot + m.func_type(i.aux).params.size() > slots;
          break;
        case visa::VOp::Trap: bad = i.slot > slots; break;
        default: break;
      }
      if (bad) return "func " + std::to_string(f) + ": slot " + std::to_string(i.slot) + " outside frame";
    }
  }
  return std::nullopt;
}

std::string event_text(const runtime::HostEvent& e) {
  std::ostringstream s;
  s << e.name << "(";
  for (size_t i = 0; i < e.args.size(); i++) s << (i ? ", " : "") << e.args[i];
  s << ")";
  if (e.result) s << " -> " << *e.result;
  if (e.scanned) s << " roots=" << e.roots.size();
  return s.str();
}

struct Job {
  std::string config;
  ExecConfig exec;
  bool roots = false;
};

// Runs one configuration against the oracle; exceptions count as divergences.
std::optional<std::string> diverges(const std::vector<uint8_t>& bytes, const Observation& oracle, const Job& job) {
  try {
    return compare(oracle, observe(bytes, job.exec), job.roots);
  } catch (const std::exception& e) {
    return std::string("exception: ") + e.what();
  }
}

runtime::TierPolicy random_policy(uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng](const runtime::SafepointInfo&) { return std::bernoulli_distribution(0.35)(*rng); };
}

}  // namespace

Observation observe(const std::vector<uint8_t>& bytes, const ExecConfig& cfg) {
  wasm::WasmModule m = wasm::decode_module(bytes);
  wasm::validate(m);
  runtime::MachineOptions mo;
  mo.mode = cfg.mode;
  mo.config = cfg.config;
  mo.cost_limit = cfg.cost_limit;
  mo.strict_scan = false;
  mo.audit = cfg.audit;
  runtime::Machine mach(m, mo);
  if (cfg.policy) mach.set_tier_policy(cfg.policy);
  Observation o;
  o.outcome = mach.run_main({});
  o.memory = mach.memory();
  o.globals = mach.globals();
  o.events = mach.events();
  o.counters = mach.counters();
  return o;
}

std::optional<std::string> compare(const Observation& oracle, const Observation& other, bool compare_roots) {
  if (oracle.outcome != other.outcome)
    return "outcome: " + to_string(oracle.outcome) + " vs " + to_string(other.outcome);
  size_t n = std::min(oracle.events.size(), other.events.size());
  for (size_t i = 0; i < n; i++) {
    const auto& a = oracle.events[i];
    const auto& b = other.events[i];
    bool same = a.name == b.name && a.args == b.args && a.result == b.result;
    if (same && compare_roots && b.scanned) same = a.scanned && a.roots == b.roots;
    if (!same) return "event " + std::to_string(i) + ": " + event_text(a) + " vs " + event_text(b);
  }
  if (oracle.events.size() != other.events.size())
    return "event count: " + std::to_string(oracle.events.size()) + " vs " + std::to_string(other.events.size());
  if (oracle.memory.size() != other.memory.size())
    return "memory size: " + std::to_string(oracle.memory.size()) + " vs " + std::to_string(other.memory.size());
  auto [pa, pb] = std::mismatch(oracle.memory.begin(), oracle.memory.end(), other.memory.begin());
  if (pa != oracle.memory.end())
    return "memory at " + std::to_string(pa - oracle.memory.begin()) + ": " + std::to_string(*pa) + " vs " +
           std::to_string(*pb);
  for (size_t g = 0; g < oracle.globals.size(); g++)
    if (oracle.globals[g] != other.globals[g])
      return "global " + std::to_string(g) + ": " + std::to_string(oracle.globals[g]) + " vs " +
             std::to_string(other.globals[g]);
  return std::nullopt;
}

bool has_root_scan(const Observation& o) {
  return std::any_of(o.events.begin(), o.events.end(), [](const auto& e) { return e.scanned && !e.roots.empty(); });
}

std::vector<CompilerConfig> config_matrix(const std::vector<Tagging>& taggings) {
  std::vector<CompilerConfig> out;
  for (Tagging t : taggings)
    for (CompilerConfig c : {CompilerConfig::allopt(), CompilerConfig::nok(), CompilerConfig::nokfold(),
                             CompilerConfig::noisel(), CompilerConfig::nomr()}) {
      c.tagging = t;
      out.push_back(c);
    }
  return out;
}

FuzzReport run_fuzz(const FuzzOptions& opts) {
  std::vector<Job> jobs;
  for (const CompilerConfig& c : opts.configs)
    jobs.push_back({c.name(), {Mode::Jit, c, kJitLimit, {}, opts.audit}, c.tagging != Tagging::None});
  std::vector<Job> root_jobs;
  for (Tagging t : opts.root_taggings) {
    CompilerConfig c;
    c.tagging = t;
    root_jobs.push_back({"roots-" + c.name(), {Mode::Jit, c, kJitLimit, {}, opts.audit}, true});
  }

  FuzzReport total;
  std::mutex mu;
  std::atomic<uint32_t> next{0};
  std::atomic<uint32_t> stop_after{opts.count};

  auto worker = [&] {
    FuzzReport r;
    std::optional<Divergence> first;
    auto record = [&](uint32_t idx, uint64_t seed, const std::string& cfg, const std::string& detail) {
      if (!first || idx < first->case_index) first = Divergence{idx, seed, cfg, detail, {}};
      stop_after = std::min<uint32_t>(stop_after, idx + 1);
    };
    for (uint32_t i; (i = next++) < stop_after.load();) {
      uint64_t cs = case_seed(opts.seed, i);
      r.cases++;
      std::vector<uint8_t> bytes = encode(generate(cs, opts.gen));
      Observation oracle;
      try {
        wasm::WasmModule m = wasm::decode_module(bytes);
        wasm::validate(m);
        if (auto bad = check_frames(m)) {
          r.frame_mismatches++;
          record(i, cs, "frame", *bad);
        }
        oracle = observe(bytes, {Mode::Interp, {}, kOracleLimit, {}, opts.audit});
      } catch (const std::exception& e) {
        r.divergences++;
        record(i, cs, "int", std::string("exception: ") + e.what());
        continue;
      }
      if (oracle.outcome.status == Outcome::Status::Limit) {
        r.skipped++;
        continue;
      }
      if (oracle.outcome.status == Outcome::Status::Trap) r.traps++;
      for (const Job& j : jobs) {
        r.runs++;
        if (auto d = diverges(bytes, oracle, j)) {
          r.divergences++;
          record(i, cs, j.config, *d);
        }
      }
      if (has_root_scan(oracle)) {
        r.root_cases++;
        for (const Job& j : root_jobs) {
          r.runs++;
          if (auto d = diverges(bytes, oracle, j)) {
            r.root_mismatches++;
            record(i, cs, j.config, *d);
          }
        }
      }
      for (uint32_t s = 0; s < opts.tier_schedules_per_case; s++) {
        Job j{"tiered-schedule-" + std::to_string(s),
              {Mode::Tiered, CompilerConfig::allopt(), kJitLimit, random_policy(cs ^ (0x5bd1e995ull * (s + 1))),
               opts.audit},
              true};
        r.runs++;
        r.schedules++;
        if (auto d = diverges(bytes, oracle, j)) {
          r.schedule_mismatches++;
          record(i, cs, j.config, *d);
        }
      }
    }
    std::lock_guard lock(mu);
    total.cases += r.cases;
    total.skipped += r.skipped;
    total.runs += r.runs;
    total.divergences += r.divergences;
    total.root_cases += r.root_cases;
    total.root_mismatches += r.root_mismatches;
    total.schedules += r.schedules;
    total.schedule_mismatches += r.schedule_mismatches;
    total.frame_mismatches += r.frame_mismatches;
    total.traps += r.traps;
    if (first && (!total.first || first->case_index < total.first->case_index)) total.first = first;
  };

  uint32_t nthreads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min(nthreads, std::max(1u, opts.count));
  std::vector<std::thread> pool;
  for (uint32_t t = 0; t < nthreads; t++) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (total.first) {
    Divergence& d = *total.first;
    FuzzModule fm = generate(d.case_seed, opts.gen);
    const Job* job = nullptr;
    std::optional<Job> sched;
    for (const auto* list : {&jobs, &root_jobs})
      for (const Job& j : *list)
        if (j.config == d.config) job = &j;
    if (d.config.starts_with("tiered-schedule-")) {
      uint32_t s = static_cast<uint32_t>(std::stoul(d.config.substr(16)));
      sched = Job{d.config,
                  {Mode::Tiered, CompilerConfig::allopt(), kJitLimit, random_policy(d.case_seed ^ (0x5bd1e995ull * (s + 1))),
                   opts.audit},
                  true};
      job = &*sched;
    }
    if (opts.shrink && job) {
      auto fails = [&](const FuzzModule& cand) {
        try {
          auto bytes = encode(cand);
          Job j = *job;
          if (sched) j.exec.policy = random_policy(d.case_seed ^ (0x5bd1e995ull * (std::stoul(d.config.substr(16)) + 1)));
          Observation o = observe(bytes, {Mode::Interp, {}, kOracleLimit, {}, opts.audit});
          if (o.outcome.status == Outcome::Status::Limit) return false;
          return diverges(bytes, o, j).has_value();
        } catch (const std::exception&) {
          return false;
        }
      };
      fm = shrink(fm, fails);
    }
    d.reproducer = to_text(fm);
  }
  return total;
}

}  // namespace spc::harness
