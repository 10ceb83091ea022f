// tshm: publish COO tensors through shared memory, consume them, and
// benchmark the handoff against an in-process baseline.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unistd.h>
#include <vector>

#include "tshm/bench.hpp"
#include "tshm/error.hpp"
#include "tshm/partitioner.hpp"
#include "tshm/process.hpp"
#include "tshm/producer.hpp"
#include "tshm/synthetic.hpp"

namespace {

struct TensorSource {
  std::string tensor;
  std::string synth = "64x64x64";
  std::size_t rank = 3;
  double density = 0.01;
  double noise = 0.0;
  std::uint64_t seed = 1;

  void add_to(CLI::App* app) {
    auto* t = app->add_option("--tensor", tensor, "FROSTT .tns file")->check(CLI::ExistingFile);
    auto* s = app->add_option("--synth", synth, "synthetic dims, e.g. 64x64x64")
                  ->capture_default_str();
    t->excludes(s);
    app->add_option("--rank", rank, "synthetic ground-truth rank")->capture_default_str();
    app->add_option("--density", density, "synthetic density")->capture_default_str();
    app->add_option("--noise", noise, "synthetic Gaussian noise scale")->capture_default_str();
    app->add_option("--seed", seed, "generator and CP-ALS seed")->capture_default_str();
  }

  void fill(tshm::BenchConfig& c) const {
    if (!tensor.empty()) c.tensor_path = tensor;
    c.synth_dims = tshm::parse_dims(synth);
    c.synth_rank = rank;
    c.density = density;
    c.noise = noise;
    c.seed = seed;
  }
};

void print_plan(const tshm::PartitionPlan& plan, std::size_t nnz) {
  std::cout << "dims";
  for (auto d : plan.dims) std::cout << ' ' << d;
  std::cout << "\nnnz " << nnz << "\nparts " << plan.parts << "\ngrid";
  for (auto g : plan.grid) std::cout << ' ' << g;
  std::cout << '\n';
  for (std::size_t m = 0; m < plan.cuts.size(); ++m) {
    std::cout << "cuts[" << m << "]";
    for (auto c : plan.cuts[m]) std::cout << ' ' << c;
    std::cout << '\n';
  }
  for (std::size_t k = 0; k < plan.parts; ++k) {
    std::cout << "box " << k << " [";
    for (std::size_t m = 0; m < plan.dims.size(); ++m)
      std::cout << (m ? "," : "") << plan.boxes[k].lower[m];
    std::cout << "]..[";
    for (std::size_t m = 0; m < plan.dims.size(); ++m)
      std::cout << (m ? "," : "") << plan.boxes[k].upper[m];
    std::cout << "] count " << plan.counts[k] << '\n';
  }
  std::cout << "capacity " << plan.capacity << "\npadding_ratio "
            << tshm::padding_ratio(plan) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-copy sparse tensor handoff through shared memory"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "publish, spawn a consumer, report timings");
  TensorSource bench_src;
  bench_src.add_to(bench);
  std::vector<std::size_t> bench_parts{1};
  std::size_t cp_rank = 16, iters = 5, repeats = 5;
  int threads = 1;
  long timeout_ms = 60000;
  std::string csv_path, work_dir;
  bool keep = false, file_baseline = false;
  bench->add_option("--parts", bench_parts, "partition counts to run")->capture_default_str();
  bench->add_option("--cp-rank", cp_rank, "CP rank")->capture_default_str();
  bench->add_option("--iters", iters, "CP-ALS iterations")->capture_default_str();
  bench->add_option("--repeats", repeats, "repeats per configuration")->capture_default_str();
  bench->add_option("--threads", threads, "compute threads")->capture_default_str();
  bench->add_option("--timeout-ms", timeout_ms, "handshake timeout")->capture_default_str();
  bench->add_option("--csv", csv_path, "write per-repeat CSV here");
  bench->add_option("--work-dir", work_dir, "directory for metadata files");
  bench->add_flag("--keep", keep, "leave regions and metadata in place");
  bench->add_flag("--file-baseline", file_baseline, "also time a .tns write/read handoff");

  // consume
  auto* consume = app.add_subcommand("consume", "attach to a session and run CP-ALS");
  tshm::ConsumerJob job;
  std::string c_meta, c_tns, c_report, c_model_out;
  std::optional<double> sentinel;
  bool no_compute = false;
  long c_timeout = 60000;
  auto* m_opt = consume->add_option("--metadata", c_meta, "session metadata file");
  auto* t_opt = consume->add_option("--tns", c_tns, "read a .tns file into heap memory instead");
  m_opt->excludes(t_opt);
  consume->add_option("--parts", job.parts, "partition count with --tns")->capture_default_str();
  consume->add_option("--model-out", c_model_out, "with --tns, write the model bytes here");
  consume->add_option("--cp-rank", job.cp_rank, "CP rank")->capture_default_str();
  consume->add_option("--iters", job.iterations, "CP-ALS iterations")->capture_default_str();
  consume->add_option("--seed", job.seed, "CP-ALS seed")->capture_default_str();
  consume->add_option("--threads", job.threads, "compute threads")->capture_default_str();
  consume->add_option("--timeout-ms", c_timeout, "wait for READY")->capture_default_str();
  consume->add_option("--report", c_report, "write key=value timings here");
  consume->add_option("--sentinel", sentinel, "write this value into the first live slot");
  consume->add_flag("--no-compute", no_compute, "skip CP-ALS; return a rank-1 placeholder");

  // publish
  auto* publish = app.add_subcommand("publish", "publish a tensor and wait for a consumer");
  TensorSource pub_src;
  pub_src.add_to(publish);
  std::size_t pub_parts = 1;
  std::string session_token, pub_meta;
  long pub_timeout = 600000;
  bool pub_keep = false;
  publish->add_option("--parts", pub_parts, "partition count")->capture_default_str();
  publish->add_option("--session", session_token, "session token")->required();
  publish->add_option("--metadata", pub_meta, "metadata file path")->required();
  publish->add_option("--timeout-ms", pub_timeout, "wait for DONE")->capture_default_str();
  publish->add_flag("--keep", pub_keep, "leave regions in place on exit");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "print the bounding-box partition plan");
  TensorSource plan_src;
  plan_src.add_to(plan_cmd);
  std::size_t plan_parts = 1;
  plan_cmd->add_option("--parts", plan_parts, "partition count")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) {
      tshm::BenchConfig config;
      bench_src.fill(config);
      config.cp_rank = cp_rank;
      config.iterations = iters;
      config.repeats = repeats;
      config.threads = threads;
      config.keep = keep;
      config.file_baseline = file_baseline;
      config.timeout = std::chrono::milliseconds(timeout_ms);
      config.consumer_exe = tshm::current_executable();
      if (!work_dir.empty()) config.work_dir = work_dir;
      std::ofstream csv;
      if (!csv_path.empty()) {
        csv.open(csv_path);
        if (!csv) throw tshm::Error(tshm::Errc::io, "cannot open " + csv_path);
      }
      bool first = true;
      for (std::size_t p : bench_parts) {
        config.parts = p;
        const auto report = tshm::run_bench(config);
        tshm::write_table(report, std::cout);
        if (csv.is_open()) tshm::write_csv(report, csv, first);
        first = false;
      }
      return 0;
    }
    if (*consume) {
      if (!c_meta.empty()) job.metadata_path = c_meta;
      if (!c_tns.empty()) job.tns_path = c_tns;
      if (!c_report.empty()) job.report_path = c_report;
      if (!c_model_out.empty()) job.model_out = c_model_out;
      job.sentinel = sentinel;
      job.compute = !no_compute;
      job.timeout = std::chrono::milliseconds(c_timeout);
      return tshm::run_consumer_job(job, std::cerr);
    }
    if (*publish) {
      tshm::BenchConfig config;
      pub_src.fill(config);
      const auto t = tshm::bench_tensor(config);
      const auto plan = tshm::build_plan(t, pub_parts);
      auto session = tshm::ProducerSession::publish(t, plan, session_token, pub_meta);
      if (pub_keep) session.keep();
      std::cout << "READY " << pub_meta << " nnz=" << t.nnz() << " parts=" << plan.parts
                << std::endl;
      const auto model = session.await_done(std::chrono::milliseconds(pub_timeout));
      std::cout << "DONE rank=" << model.rank << " weights";
      for (double w : model.weights) std::cout << ' ' << w;
      std::cout << std::endl;
      return 0;
    }
    if (*plan_cmd) {
      tshm::BenchConfig config;
      plan_src.fill(config);
      const auto t = tshm::bench_tensor(config);
      print_plan(tshm::build_plan(t, plan_parts), t.nnz());
      return 0;
    }
  } catch (const tshm::Error& e) {
    std::cerr << "tshm: " << tshm::to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "tshm: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
