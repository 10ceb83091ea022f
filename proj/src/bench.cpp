#include "tshm/bench.hpp"

#include <omp.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "tshm/consumer.hpp"
#include "tshm/cp_als.hpp"
#include "tshm/error.hpp"
#include "tshm/partition_view.hpp"
#include "tshm/partitioner.hpp"
#include "tshm/process.hpp"
#include "tshm/producer.hpp"
#include "tshm/synthetic.hpp"

namespace tshm {

namespace {

using clock = std::chrono::steady_clock;

double seconds_since(clock::time_point t0) {
  return std::chrono::duration<double>(clock::now() - t0).count();
}

std::map<std::string, std::string> read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "consumer report missing: " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

double report_double(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw Error(Errc::parse, "consumer report lacks " + key);
  return std::stod(it->second);
}

// Result-region bytes in an ordinary file, written via rename.
void write_model_file(const KruskalModel& m, const std::filesystem::path& path) {
  std::vector<std::byte> buf(result_bytes(m.dims, m.rank));
  write_result(buf, m);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw Error(Errc::io, "cannot write model " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

KruskalModel read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "baseline model missing: " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> buf(raw.size());
  std::memcpy(buf.data(), raw.data(), raw.size());
  return read_result(buf);
}

// Untimed single-element cp_als with the real dims and rank, so one-time
// process costs (code page faults, heap growth to the factor footprint,
// OpenMP start-up) stay out of the compute timings. Both consumer arms call
// it; it never touches session data.
void warm_up(std::span<const Index> dims, const CpAlsOptions& options) {
  CooTensor t;
  t.dims.assign(dims.begin(), dims.end());
  t.coords.assign(dims.size(), 0);
  t.values = {1.0};
  const InMemoryPartitions local(t, build_plan(t, 1));
  CpAlsOptions o = options;
  o.iterations = 1;
  (void)cp_als(local.views(), t.dims, o);
}

std::string unique_token(std::size_t repeat) {
  static std::mt19937_64 rng(std::random_device{}());
  std::ostringstream s;
  s << "b" << ::getpid() << "-" << repeat << "-" << std::hex << (rng() & 0xffffff);
  return s.str();
}

Stat column(const std::vector<BenchRun>& runs, double BenchRun::*field) {
  std::vector<double> xs;
  for (const auto& r : runs) xs.push_back(r.*field);
  return summarize(xs);
}

std::string sci(double x) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << x;
  return s.str();
}

}  // namespace

Stat summarize(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  double sum = 0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double sq = 0;
    for (double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.stdev = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  }
  auto sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return s;
}

Stat BenchReport::setup() const { return column(runs, &BenchRun::setup_s); }
Stat BenchReport::attach() const { return column(runs, &BenchRun::attach_s); }
Stat BenchReport::compute_handoff() const { return column(runs, &BenchRun::compute_handoff_s); }
Stat BenchReport::compute_inprocess() const {
  return column(runs, &BenchRun::compute_inprocess_s);
}
bool BenchReport::all_models_identical() const {
  return std::all_of(runs.begin(), runs.end(), [](const BenchRun& r) { return r.models_identical; });
}

CooTensor bench_tensor(const BenchConfig& config) {
  if (config.tensor_path) return read_tns_file(*config.tensor_path);
  return gen_synthetic({config.synth_dims, config.synth_rank, config.density, config.noise,
                        config.seed});
}

BenchReport run_bench(const BenchConfig& config) {
  if (config.repeats < 1) throw Error(Errc::invalid_argument, "repeats must be >= 1");
  if (config.consumer_exe.empty())
    throw Error(Errc::invalid_argument, "no consumer executable configured");
  omp_set_num_threads(std::max(1, config.threads));

  const CooTensor t = bench_tensor(config);
  const PartitionPlan plan = build_plan(t, config.parts);

  BenchReport report;
  if (config.tensor_path) {
    report.tensor = config.tensor_path->stem().string();
  } else {
    std::ostringstream s;
    for (std::size_t m = 0; m < config.synth_dims.size(); ++m)
      s << (m ? "x" : "synth-") << config.synth_dims[m];
    report.tensor = s.str();
  }
  report.parts = plan.parts;
  report.nnz = t.nnz();

  // The heap baseline runs in its own fresh process, like the handoff
  // consumer, so neither timing benefits from a warmed-up process.
  const std::string base_token = unique_token(config.repeats);
  const auto tns_path = config.work_dir / ("tshm-" + base_token + ".tns");
  auto t0 = clock::now();
  write_tns_file(t, tns_path);
  const double write_s = seconds_since(t0);
  struct RemoveFile {
    std::filesystem::path p;
    ~RemoveFile() {
      std::error_code ec;
      std::filesystem::remove(p, ec);
    }
  } remove_tns{tns_path};

  const std::vector<std::string> compute_args{
      "--cp-rank", std::to_string(config.cp_rank), "--iters", std::to_string(config.iterations),
      "--seed", std::to_string(config.seed), "--threads", std::to_string(config.threads)};
  auto consume_argv = [&](std::vector<std::string> head) {
    std::vector<std::string> argv{config.consumer_exe.string(), "consume"};
    argv.insert(argv.end(), head.begin(), head.end());
    argv.insert(argv.end(), compute_args.begin(), compute_args.end());
    return argv;
  };

  for (std::size_t rep = 0; rep < config.repeats; ++rep) {
    BenchRun run;
    run.repeat = rep;
    run.padding_ratio = padding_ratio(plan);

    const std::string token = unique_token(rep);
    const auto meta_path = config.work_dir / ("tshm-" + token + ".meta");
    const auto report_path = config.work_dir / ("tshm-" + token + ".report");
    const auto model_path = config.work_dir / ("tshm-" + token + ".model");

    t0 = clock::now();
    ProducerSession session = ProducerSession::publish(t, plan, token, meta_path);
    run.setup_s = seconds_since(t0);
    KruskalModel handoff;
    try {
      ChildProcess child = spawn_process(consume_argv(
          {"--metadata", meta_path.string(), "--timeout-ms",
           std::to_string(config.timeout.count()), "--report", report_path.string()}));
      handoff = session.await_done(config.timeout);
      if (int rc = child.wait(); rc != 0)
        throw Error(Errc::peer_error, "consumer exited with status " + std::to_string(rc));
      const auto kv = read_report(report_path);
      std::filesystem::remove(report_path);
      run.attach_s = report_double(kv, "attach_s");
      run.compute_handoff_s = report_double(kv, "compute_s");
      run.fit = report_double(kv, "fit");
    } catch (...) {
      if (config.keep) session.keep();
      throw;
    }
    if (config.keep) session.keep();

    ChildProcess baseline = spawn_process(
        consume_argv({"--tns", tns_path.string(), "--parts", std::to_string(config.parts),
                      "--report", report_path.string(), "--model-out", model_path.string()}));
    if (int rc = baseline.wait(); rc != 0)
      throw Error(Errc::peer_error, "baseline consumer exited with " + std::to_string(rc));
    const auto kv = read_report(report_path);
    std::filesystem::remove(report_path);
    run.compute_inprocess_s = report_double(kv, "compute_s");
    if (config.file_baseline) run.file_io_s = write_s + report_double(kv, "parse_s");
    run.models_identical = bitwise_equal(handoff, read_model_file(model_path));
    std::filesystem::remove(model_path);
    report.runs.push_back(run);
  }
  return report;
}

void write_csv(const BenchReport& report, std::ostream& out, bool header) {
  if (header) out << kCsvHeader << '\n';
  out << std::setprecision(9);
  for (const auto& r : report.runs)
    out << report.tensor << ',' << report.parts << ',' << r.repeat << ',' << r.setup_s << ','
        << r.attach_s << ',' << r.compute_handoff_s << ',' << r.compute_inprocess_s << ','
        << r.padding_ratio << '\n';
}

void write_table(const BenchReport& report, std::ostream& out) {
  auto cell = [](const Stat& s) { return sci(s.mean) + " (" + sci(s.stdev) + ")"; };
  const bool with_file = !report.runs.empty() && report.runs.front().file_io_s.has_value();
  out << std::left << std::setw(20) << "tensor" << std::right << std::setw(5) << "P"
      << std::setw(22) << "setup s (sd)" << std::setw(22) << "attach s (sd)"
      << std::setw(22) << "handoff s (sd)" << std::setw(22) << "in-process s (sd)"
      << std::setw(10) << "padding" << std::setw(10) << "fit" << std::setw(11) << "identical";
  if (with_file) out << std::setw(22) << "file i/o s (sd)";
  out << '\n';
  std::vector<double> fits, files;
  for (const auto& r : report.runs) {
    fits.push_back(r.fit);
    if (r.file_io_s) files.push_back(*r.file_io_s);
  }
  out << std::left << std::setw(20) << report.tensor << std::right << std::setw(5)
      << report.parts << std::setw(22) << cell(report.setup()) << std::setw(22)
      << cell(report.attach()) << std::setw(22) << cell(report.compute_handoff())
      << std::setw(22) << cell(report.compute_inprocess()) << std::setw(10)
      << std::fixed << std::setprecision(3)
      << (report.runs.empty() ? 0.0 : report.runs.front().padding_ratio) << std::setw(10)
      << summarize(fits).mean << std::setw(11)
      << (report.all_models_identical() ? "yes" : "no");
  out.unsetf(std::ios::floatfield);
  if (with_file) out << std::setw(22) << cell(summarize(files));
  out << '\n';
}

int run_consumer_job(const ConsumerJob& job, std::ostream& log) {
  omp_set_num_threads(std::max(1, job.threads));
  std::ostringstream rep;
  rep << std::setprecision(17);
  const CpAlsOptions options{job.cp_rank, job.iterations, job.seed};

  if (job.tns_path) {
    auto t0 = clock::now();
    const CooTensor t = read_tns_file(*job.tns_path);
    rep << "parse_s=" << seconds_since(t0) << '\n';
    const auto plan = build_plan(t, job.parts);
    const InMemoryPartitions local(t, plan);
    warm_up(t.dims, options);
    t0 = clock::now();
    const auto res = cp_als(local.views(), t.dims, options);
    rep << "compute_s=" << seconds_since(t0) << "\nfit=" << res.fit << '\n';
    if (job.model_out) write_model_file(res.model, *job.model_out);
  } else if (job.metadata_path) {
    auto t0 = clock::now();
    ConsumerSession session = attach_session(*job.metadata_path, job.timeout);
    rep << "attach_s=" << seconds_since(t0) << '\n';
    const auto sums = session_checksums(session.views(), session.metadata().order());
    rep << "nnz=" << sums.nnz << "\nvalsum=" << sums.valsum << "\ncoordhash=" << sums.coordhash
        << '\n';
    if (job.sentinel) {
      auto views = session.views();
      auto it = std::find_if(views.begin(), views.end(),
                             [](const PartitionView& v) { return v.count > 0; });
      if (it == views.end()) {
        session.fail(peer_code::compute_failure);
        log << "consume: no element to receive the sentinel\n";
        return 1;
      }
      it->values[0] = *job.sentinel;
      rep << "sentinel_partition=" << (it - views.begin()) << '\n';
    }
    KruskalModel model;
    if (job.compute) {
      try {
        warm_up(session.dims(), options);
        t0 = clock::now();
        auto res = cp_als(session.views(), session.dims(), options);
        rep << "compute_s=" << seconds_since(t0) << "\nfit=" << res.fit << '\n';
        if (res.rank_deficient) log << "consume: warning: rank-deficient Gram matrix\n";
        model = std::move(res.model);
      } catch (const std::exception& e) {
        session.fail(peer_code::compute_failure);
        log << "consume: compute failed: " << e.what() << '\n';
        return 1;
      }
    } else {
      // Placeholder rank-1 model: all-ones factors, weight = valsum.
      model.dims.assign(session.dims().begin(), session.dims().end());
      model.rank = 1;
      model.weights = {sums.valsum};
      for (Index n : model.dims) {
        FactorMatrix f(n, 1);
        std::fill(f.data.begin(), f.data.end(), 1.0);
        model.factors.push_back(std::move(f));
      }
    }
    finish(session, model);
  } else {
    throw Error(Errc::invalid_argument, "consume needs --metadata or --tns");
  }

  if (job.report_path) {
    const auto tmp = job.report_path->string() + ".tmp";
    {
      std::ofstream out(tmp);
      out << rep.str();
      if (!out) throw Error(Errc::io, "cannot write report " + tmp);
    }
    std::filesystem::rename(tmp, *job.report_path);
  } else {
    log << rep.str();
  }
  return 0;
}

}  // namespace tshm
