// Command-line surface: model I/O, exact inference, exact sampling, test-model
// generation, and the benchmark/KL harnesses.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <string>

#include "ising/engine.hpp"
#include "ising/model_io.hpp"
#include "ising/testkit.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void print_report(const ising::RunStats& st, double wall_ms) {
  std::printf("wall_time_ms\t%.6g\n", wall_ms);
  std::printf("components\tplanar=%ld nonplanar=%ld bond=%ld biconnected=%d connected=%d\n",
              st.planar_nodes, st.nonplanar_nodes, st.bond_nodes, st.biconnected_components,
              st.connected_components);
  std::printf("flags\tdense_fallbacks=%ld\n", st.dense_fallbacks);
}

int cmd_infer(const std::string& path, int bound, const std::string& format) {
  const ising::IsingModel m = ising::load_model(path);
  const auto t0 = Clock::now();
  ising::EngineOptions opts;
  opts.nonplanar_size_bound = bound;
  ising::IsingEngine engine(m, opts);
  const double log_z = engine.log_z();
  const double wall = ms_since(t0);
  if (format == "json") {
    nlohmann::json doc{{"log_z", log_z},
                       {"wall_time_ms", wall},
                       {"stats",
                        {{"planar_nodes", engine.stats().planar_nodes},
                         {"nonplanar_nodes", engine.stats().nonplanar_nodes},
                         {"bond_nodes", engine.stats().bond_nodes},
                         {"dense_fallbacks", engine.stats().dense_fallbacks}}}};
    std::printf("%s\n", doc.dump(2).c_str());
  } else {
    std::printf("%.12g\n", log_z);
    print_report(engine.stats(), wall);
  }
  return 0;
}

int cmd_sample(const std::string& path, long num_samples, std::uint64_t seed, int bound,
               const std::string& format) {
  const ising::IsingModel m = ising::load_model(path);
  ising::EngineOptions opts;
  opts.nonplanar_size_bound = bound;
  ising::IsingEngine engine(m, opts);
  ising::Rng rng(seed);
  nlohmann::json all = nlohmann::json::array();
  for (long s = 0; s < num_samples; ++s) {
    const auto x = engine.sample(rng);
    if (format == "json") {
      all.push_back(std::vector<int>(x.begin(), x.end()));
    } else {
      for (std::size_t v = 0; v < x.size(); ++v)
        std::printf("%s%d", v ? " " : "", static_cast<int>(x[v]));
      std::printf("\n");
    }
  }
  if (format == "json") std::printf("%s\n", nlohmann::json{{"samples", all}}.dump().c_str());
  return 0;
}

int cmd_gen(const std::string& kind, int size, std::uint64_t seed, double stddev,
            const std::string& out) {
  ising::Rng rng(seed);
  ising::IsingModel m;
  if (kind == "planar") {
    m = ising::testkit::with_random_couplings(ising::testkit::gen_random_planar(size, rng).graph,
                                              stddev, rng);
  } else if (kind == "k33free") {
    m = ising::testkit::gen_random_k33free({size, stddev, seed});
  } else if (kind == "necklace") {
    if (size % 5 != 0) throw ising::InvalidModelError("necklace size must be a multiple of 5");
    m = ising::testkit::with_random_couplings(ising::testkit::gen_k5_necklace(size / 5), stddev,
                                              rng);
  } else {
    throw ising::InvalidModelError("unknown kind: " + kind);
  }
  if (out.empty()) {
    std::fputs(ising::write_model_file(m).c_str(), stdout);
  } else {
    ising::save_model(m, out);
  }
  return 0;
}

int cmd_bench(const std::string& sizes_csv, std::uint64_t seed, double stddev) {
  std::vector<int> sizes;
  {
    std::string tok;
    for (const char c : sizes_csv + ",") {
      if (c == ',') {
        if (!tok.empty()) sizes.push_back(std::stoi(tok));
        tok.clear();
      } else {
        tok += c;
      }
    }
  }
  std::printf("N\tinfer_ms\tsample_ms\n");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const int n = sizes[i];
    const auto m = ising::testkit::gen_random_k33free({n, stddev, seed + i});
    const auto t0 = Clock::now();
    ising::IsingEngine engine(m);
    const double lz = engine.log_z();
    const double infer_ms = ms_since(t0);
    ising::Rng rng(seed + 1000 + i);
    const auto t1 = Clock::now();
    const auto x = engine.sample(rng);
    const double sample_ms = ms_since(t1);
    (void)lz;
    (void)x;
    std::printf("%d\t%.6g\t%.6g\n", n, infer_ms, sample_ms);
    std::fflush(stdout);
  }
  return 0;
}

int cmd_kltest(int size, const std::string& counts_csv, std::uint64_t seed, double stddev) {
  std::vector<long> counts;
  {
    std::string tok;
    for (const char c : counts_csv + ",") {
      if (c == ',') {
        if (!tok.empty()) counts.push_back(std::stol(tok));
        tok.clear();
      } else {
        tok += c;
      }
    }
  }
  std::sort(counts.begin(), counts.end());
  const auto m = ising::testkit::gen_random_k33free({size, stddev, seed});
  ising::IsingEngine engine(m);
  ising::Rng rng(seed + 1);
  std::vector<ising::SpinConfiguration> samples;
  samples.reserve(counts.back());
  std::printf("m\tKL\n");
  for (const long target : counts) {
    while (static_cast<long>(samples.size()) < target) samples.push_back(engine.sample(rng));
    const double kl = ising::testkit::kl_divergence_empirical(m, samples);
    std::printf("%ld\t%.6g\n", target, kl);
    std::fflush(stdout);
  }
  return 0;
}

int cmd_selftest() {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::printf("%s %s\n", ok ? "[ok]" : "[FAIL]", name.c_str());
    if (!ok) ++failures;
  };
  for (int t = 0; t < 12; ++t) {
    const int n = 8 + t % 6;
    const auto m = ising::testkit::gen_random_k33free({n, 0.4, 77u + static_cast<unsigned>(t)});
    const double want = ising::testkit::brute_log_z(m);
    const double got = ising::infer_log_z(m);
    check("inference vs brute force N=" + std::to_string(n),
          std::abs(got - want) <= 1e-8 * std::max(1.0, std::abs(want)));
  }
  {
    const auto m = ising::testkit::gen_random_k33free({10, 0.3, 5});
    ising::IsingEngine engine(m);
    ising::Rng rng(9);
    std::vector<ising::SpinConfiguration> samples;
    for (int s = 0; s < 60000; ++s) samples.push_back(engine.sample(rng));
    const double kl = ising::testkit::kl_divergence_empirical(m, samples);
    const double bound = 3.0 * (std::pow(2.0, 10) - 1) / (2.0 * 60000);
    check("sampling KL within chi-square scale", kl < bound);
  }
  std::printf("%s\n", failures == 0 ? "selftest passed" : "selftest FAILED");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact inference and sampling for zero-field Ising models on planar and K33-minor-free graphs"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string model_path, format = "text", out_path, kind = "k33free";
  std::string sizes_csv = "1024,4096,16384,65536", counts_csv = "1000,10000,100000";
  long num_samples = 1;
  std::uint64_t seed = 0;
  int size = 10, bound = 5;
  double stddev = 0.1;

  auto* infer = app.add_subcommand("infer", "compute log Z of a model file");
  infer->add_option("--model", model_path, "model file")->required();
  infer->add_option("--nonplanar-bound", bound, "max nonplanar component size (default 5)");
  infer->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  auto* sample = app.add_subcommand("sample", "draw exact samples");
  sample->add_option("--model", model_path)->required();
  sample->add_option("--num-samples", num_samples);
  sample->add_option("--seed", seed);
  sample->add_option("--nonplanar-bound", bound);
  sample->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  auto* gen = app.add_subcommand("gen", "generate a test model file");
  gen->add_option("--kind", kind)->check(CLI::IsMember({"planar", "k33free", "necklace"}));
  gen->add_option("--size", size);
  gen->add_option("--seed", seed);
  gen->add_option("--coupling-std", stddev);
  gen->add_option("--out", out_path, "output path (stdout when omitted)");

  auto* bench = app.add_subcommand("bench", "time inference and sampling over model sizes");
  bench->add_option("--sizes", sizes_csv, "comma-separated model sizes");
  bench->add_option("--seed", seed);
  bench->add_option("--coupling-std", stddev);

  auto* kltest = app.add_subcommand("kltest", "empirical KL against the exact distribution");
  kltest->add_option("--size", size);
  kltest->add_option("--sample-counts", counts_csv);
  kltest->add_option("--seed", seed);
  kltest->add_option("--coupling-std", stddev);

  app.add_subcommand("selftest", "run the oracle-equivalence checks");

  app.footer("exit codes: 0 ok, 2 usage, 3 unreadable or malformed file, 4 unsupported topology");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("infer")) return cmd_infer(model_path, bound, format);
    if (app.got_subcommand("sample")) return cmd_sample(model_path, num_samples, seed, bound, format);
    if (app.got_subcommand("gen")) return cmd_gen(kind, size, seed, stddev, out_path);
    if (app.got_subcommand("bench")) return cmd_bench(sizes_csv, seed, stddev);
    if (app.got_subcommand("kltest")) return cmd_kltest(size, counts_csv, seed, stddev);
    if (app.got_subcommand("selftest")) return cmd_selftest();
  } catch (const ising::UnsupportedTopologyError& e) {
    std::fprintf(stderr, "unsupported topology: %s\n", e.what());
    return 4;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const ising::ModelParseError& e) {
    std::fprintf(stderr, "model parse error: %s\n", e.what());
    return 3;
  } catch (const ising::InvalidModelError& e) {
    std::fprintf(stderr, "invalid model: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
