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

#include "spc/harness/cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>

#include "spc/harness/bench.h"
#include "spc/harness/fuzz.h"
#include "spc/harness/kernels.h"
#include "spc/harness/m0.h"
#include "spc/visa/code_buffer.h"
#include "spc/wasm/decoder.h"
#include "spc/wasm/errors.h"

namespace spc::harness {

namespace fs = std::filesystem;
using wasm::TypedValue;
using wasm::ValType;

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
T parse_number(const std::string& s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw UsageError("bad argument '" + s + "'");
  return v;
}

TypedValue parse_arg(ValType t, const std::string& s) {
  switch (t) {
    case ValType::I32:
      if (s.starts_with('-')) return TypedValue::i32(parse_number<int32_t>(s));
      return TypedValue::i32(static_cast<int32_t>(parse_number<uint32_t>(s)));
    case ValType::I64:
      if (s.starts_with('-')) return TypedValue::i64(parse_number<int64_t>(s));
      return TypedValue::i64(static_cast<int64_t>(parse_number<uint64_t>(s)));
    case ValType::F32: return TypedValue::f32(parse_number<float>(s));
    case ValType::F64: return TypedValue::f64(parse_number<double>(s));
    case ValType::Ref:
      if (s == "null") return TypedValue{ValType::Ref, 0};
      throw UsageError("externref arguments must be null");
  }
  throw UsageError("bad argument");
}

std::vector<EngineConfig> parse_configs(const std::string& list) {
  std::vector<EngineConfig> out;
  size_t start = 0;
  while (start <= list.size()) {
    size_t comma = list.find(',', start);
    std::string item = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) {
      auto e = engine_from_name(item);
      if (!e) throw UsageError("unknown config '" + item + "'");
      out.push_back(*e);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw UsageError("empty config list");
  return out;
}

struct RunArgs {
  std::string mode = "tiered";
  bool no_const_track = false, no_kfold = false, no_isel = false, no_mr = false;
  std::string tags = "on-demand";
  uint32_t hot_threshold = 10;
  bool disasm = false, trace = false;
  std::string metrics;
  uint64_t limit_cost = 0;
  std::string file;
  std::vector<std::string> args;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  EngineConfig e;
  e.mode = a.mode == "int" ? runtime::Mode::Interp : a.mode == "jit" ? runtime::Mode::Jit : runtime::Mode::Tiered;
  compiler::CompilerConfig& c = e.config;
  if (a.no_const_track) c.track_consts = c.fold_consts = c.isel_imm = false;
  if (a.no_kfold) c.fold_consts = false;
  if (a.no_isel) c.isel_imm = false;
  if (a.no_mr) c.multi_reg = false;
  c.tagging = *compiler::tagging_from_flag(a.tags);

  std::vector<uint8_t> bytes = read_file(a.file);
  wasm::WasmModule m = wasm::decode_module(bytes);
  wasm::validate(m);
  auto entry = m.entry_function();
  if (!entry) throw NoEntry("module exports no function");
  const auto& params = m.func_type(*entry).params;
  if (a.args.size() != params.size())
    throw UsageError("entry function takes " + std::to_string(params.size()) + " arguments, got " +
                     std::to_string(a.args.size()));
  RunOptions ro;
  for (size_t i = 0; i < params.size(); i++) ro.args.push_back(parse_arg(params[i], a.args[i]));
  ro.cost_limit = a.limit_cost;
  ro.hot_threshold = a.hot_threshold;
  ro.print = &out;
  if (a.trace) ro.trace = &out;

  if (a.disasm) {
    for (uint32_t f = m.num_imports(); f < m.num_functions(); f++) {
      auto cf = compiler::compile_function(m, f, c);
      out << "func " << f << ":\n" << visa::disassemble(cf.code);
    }
  }

  RunResult r = run_module(bytes, e, ro);
  r.metrics.module = fs::path(a.file).filename().string();
  if (!a.metrics.empty()) {
    std::ofstream csv(a.metrics);
    if (!csv) throw std::runtime_error("cannot write " + a.metrics);
    csv << kCsvHeader << "\n" << csv_row(r.metrics) << "\n";
  }
  out << to_string(r.outcome) << "\n";
  return r.outcome.ok() ? kExitOk : kExitTrap;
}

int cmd_bench(const std::string& suite, const std::string& configs, uint32_t reps, const std::string& out_path,
              std::ostream& out) {
  std::vector<EngineConfig> engines = parse_configs(configs);
  std::vector<NamedModule> modules;
  std::string suite_name;
  if (suite == "builtin") {
    suite_name = "builtin";
    for (auto& k : shipped_kernels()) modules.push_back({k.name, std::move(k.bytes)});
  } else {
    suite_name = fs::path(suite).filename().string();
    std::vector<fs::path> files;
    for (const auto& ent : fs::directory_iterator(suite))
      if (ent.is_regular_file() && ent.path().extension() == ".wasm") files.push_back(ent.path());
    std::sort(files.begin(), files.end());
    // mnop.wasm is the startup baseline, measured for every module anyway.
    for (const auto& p : files)
      if (p.stem() != "mnop") modules.push_back({p.stem().string(), read_file(p.string())});
    if (modules.empty()) throw UsageError("no .wasm files in " + suite);
  }
  std::ofstream csv;
  if (!out_path.empty()) {
    csv.open(out_path);
    if (!csv) throw std::runtime_error("cannot write " + out_path);
    csv << kCsvHeader << "\n";
  }
  auto points = measure_sq(engines, modules, reps, suite_name, out_path.empty() ? nullptr : &csv);
  out << std::left << std::setw(28) << "config" << std::setw(20) << "module" << std::right << std::setw(14)
      << "setup MB/s" << std::setw(14) << "adj.speedup" << "\n";
  for (const SqPoint& p : points)
    out << std::left << std::setw(28) << p.config << std::setw(20) << p.module << std::right << std::setw(14)
        << std::fixed << std::setprecision(3) << p.setup_speed_mbps << std::setw(14) << p.adjusted_speedup << "\n";
  return kExitOk;
}

struct FuzzArgs {
  uint64_t seed = 1;
  uint32_t count = 1000;
  std::string configs;
  uint32_t threads = 0;
  uint32_t schedules = 0;
  bool audit = false;
  bool no_shrink = false;
  bool broken_merge = false;
};

int cmd_fuzz(FuzzArgs a, std::ostream& out) {
  if (const char* env = std::getenv("SPC_SEED")) a.seed = parse_number<uint64_t>(env);
  FuzzOptions o;
  o.seed = a.seed;
  o.count = a.count;
  using T = compiler::Tagging;
  if (a.configs.empty()) {
    o.configs = config_matrix({T::None, T::Eager, T::OnDemand, T::Lazy});
  } else {
    for (const EngineConfig& e : parse_configs(a.configs)) {
      if (e.mode != runtime::Mode::Jit) throw UsageError("fuzz configs must be compiler configs");
      o.configs.push_back(e.config);
    }
  }
  if (a.broken_merge)
    for (auto& c : o.configs) c.fault_broken_merge = true;
  o.root_taggings = {T::Eager, T::OnDemand, T::Lazy};
  o.tier_schedules_per_case = a.schedules;
  o.threads = a.threads;
  o.audit = a.audit;
  o.shrink = !a.no_shrink;
  FuzzReport r = run_fuzz(o);
  out << "seed " << a.seed << ": " << r.cases << " cases, " << r.skipped << " skipped, " << r.runs << " runs, "
      << r.traps << " trapping\n";
  out << "divergences " << r.divergences << ", root cases " << r.root_cases << " (mismatches "
      << r.root_mismatches << "), schedules " << r.schedules << " (mismatches " << r.schedule_mismatches
      << "), frame mismatches " << r.frame_mismatches << "\n";
  if (!r.first) return kExitOk;
  const Divergence& d = *r.first;
  out << "first divergence: case " << d.case_index << " (seed " << d.case_seed << ") under " << d.config << ": "
      << d.detail << "\n"
      << d.reproducer;
  return kExitInvalid;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"single-pass compiler harness", "spc"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "run a module's entry function");
  run->add_option("--mode", ra.mode)->check(CLI::IsMember({"int", "jit", "tiered"}));
  run->add_flag("--no-const-track", ra.no_const_track);
  run->add_flag("--no-kfold", ra.no_kfold);
  run->add_flag("--no-isel", ra.no_isel);
  run->add_flag("--no-mr", ra.no_mr);
  run->add_option("--tags", ra.tags)
      ->check(CLI::IsMember({"none", "eager", "eager-ops", "eager-locals", "on-demand", "lazy"}));
  run->add_option("--hot-threshold", ra.hot_threshold)->check(CLI::PositiveNumber);
  run->add_flag("--disasm", ra.disasm);
  run->add_flag("--trace", ra.trace);
  run->add_option("--metrics", ra.metrics);
  run->add_option("--limit-cost", ra.limit_cost);
  run->add_option("file", ra.file)->required();
  run->add_option("args", ra.args);

  std::string suite, configs = "int,allopt", out_csv;
  uint32_t reps = 3;
  auto* bench = app.add_subcommand("bench", "SQ-space measurement over a suite");
  bench->add_option("--suite", suite, "directory of .wasm files, or 'builtin'")->required();
  bench->add_option("--configs", configs, "comma-separated; the first is the baseline");
  bench->add_option("--reps", reps)->check(CLI::PositiveNumber);
  bench->add_option("--out", out_csv);

  FuzzArgs fa;
  auto* fuzz = app.add_subcommand("fuzz", "differential fuzzing against the interpreter");
  fuzz->add_option("--seed", fa.seed);
  fuzz->add_option("--count", fa.count)->check(CLI::PositiveNumber);
  fuzz->add_option("--configs", fa.configs);
  fuzz->add_option("--threads", fa.threads);
  fuzz->add_option("--tier-schedules", fa.schedules, "random tier schedules per case");
  fuzz->add_flag("--audit", fa.audit);
  fuzz->add_flag("--no-shrink", fa.no_shrink);
  fuzz->add_flag("--fault-broken-merge", fa.broken_merge);

  std::string m0_in, m0_out;
  auto* m0 = app.add_subcommand("m0", "insert an opaque early return into the entry function");
  m0->add_option("in", m0_in)->required();
  m0->add_option("-o", m0_out)->required();

  std::string kdir;
  auto* kernels = app.add_subcommand("kernels", "write the generated benchmark kernels");
  kernels->add_option("--out", kdir)->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; usage errors share the invalid-input code.
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*run) return cmd_run(ra, out);
    if (*bench) return cmd_bench(suite, configs, reps, out_csv, out);
    if (*fuzz) return cmd_fuzz(fa, out);
    if (*m0) {
      write_file(m0_out, make_m0(read_file(m0_in)));
      return kExitOk;
    }
    if (*kernels) {
      fs::create_directories(kdir);
      for (const Kernel& k : shipped_kernels()) write_file((fs::path(kdir) / (k.name + ".wasm")).string(), k.bytes);
      write_file((fs::path(kdir) / "mnop.wasm").string(), mnop_module());
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const wasm::MalformedModule& e) {
    err << e.what() << "\n";
    return kExitInvalid;
  } catch (const wasm::ValidationError& e) {
    err << e.what() << "\n";
    return kExitInvalid;
  } catch (const runtime::LinkError& e) {
    err << "link error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NoEntry& e) {
    err << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace spc::harness
