#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tshm/coo_tensor.hpp"

namespace tshm {

// Producer-plus-spawned-consumer benchmark. Defaults follow the reference
// experiment: rank-16 CP, 5 iterations, 5 repeats.
struct BenchConfig {
  std::optional<std::filesystem::path> tensor_path;
  std::vector<Index> synth_dims{64, 64, 64};
  std::size_t synth_rank = 3;
  double density = 0.01;
  double noise = 0.0;
  std::size_t parts = 1;
  std::size_t cp_rank = 16;
  std::size_t iterations = 5;
  std::size_t repeats = 5;
  std::uint64_t seed = 1;
  int threads = 1;
  bool keep = false;
  bool file_baseline = false;
  std::chrono::milliseconds timeout{60000};
  // Executable providing the `consume` subcommand.
  std::filesystem::path consumer_exe;
  std::filesystem::path work_dir = std::filesystem::temp_directory_path();
};

struct BenchRun {
  std::size_t repeat = 0;
  double setup_s = 0;              // region creation + fill + metadata + READY
  double attach_s = 0;             // consumer await + attach + validate
  double compute_handoff_s = 0;    // cp_als over shared-memory views
  double compute_inprocess_s = 0;  // cp_als over heap partitions in a fresh process, no shm
  double padding_ratio = 0;
  double fit = 0;
  bool models_identical = false;   // handoff model bitwise equal to in-process
  std::optional<double> file_io_s;  // write .tns + consumer parse
};

struct Stat {
  double mean = 0, stdev = 0, median = 0;
};
Stat summarize(const std::vector<double>& xs);

struct BenchReport {
  std::string tensor;
  std::size_t parts = 0;
  std::size_t nnz = 0;
  std::vector<BenchRun> runs;

  Stat setup() const;
  Stat attach() const;
  Stat compute_handoff() const;
  Stat compute_inprocess() const;
  bool all_models_identical() const;
};

BenchReport run_bench(const BenchConfig& config);
// Loads or generates the configured tensor (seed drives the generator).
CooTensor bench_tensor(const BenchConfig& config);

inline constexpr const char* kCsvHeader =
    "tensor,P,repeat,setup_s,attach_s,compute_handoff_s,compute_inprocess_s,padding_ratio";
void write_csv(const BenchReport& report, std::ostream& out, bool header = true);
void write_table(const BenchReport& report, std::ostream& out);

// The `consume` side of a bench run, executed in the spawned process.
struct ConsumerJob {
  std::optional<std::filesystem::path> metadata_path;
  std::optional<std::filesystem::path> tns_path;  // heap baseline: no shared memory
  std::size_t parts = 1;                          // partition count for the heap baseline
  std::optional<std::filesystem::path> model_out;  // heap baseline: result bytes go here
  std::size_t cp_rank = 16;
  std::size_t iterations = 5;
  std::uint64_t seed = 1;
  int threads = 1;
  std::chrono::milliseconds timeout{60000};
  std::optional<std::filesystem::path> report_path;
  std::optional<double> sentinel;  // written to partition 0, slot 0 before compute
  bool compute = true;
};

// Returns a process exit code. Writes `key=value` timing lines to the report
// path: attach_s, compute_s, fit, nnz, valsum, coordhash (parse_s and
// compute_s for the heap baseline).
int run_consumer_job(const ConsumerJob& job, std::ostream& log);

}  // namespace tshm
