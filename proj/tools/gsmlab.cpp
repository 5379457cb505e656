#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "gsmlab/lab.hpp"
#include "gsmlab/rainbow.hpp"

namespace fs = std::filesystem;
using namespace gsmlab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << data;
}

Bits parse_bitstring(const std::string& s) {
  Bits b;
  for (char c : s) {
    if (c != '0' && c != '1') throw std::runtime_error("bit strings use only 0 and 1");
    b.push_back(static_cast<Bit>(c - '0'));
  }
  return b;
}

std::string default_out() {
  const char* env = std::getenv("GSMLAB_OUT");
  return env && *env ? env : "gsmlab-out";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GSM air-interface security lab"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run scenario files and write traces and reports");
  std::vector<std::string> files;
  std::optional<std::uint64_t> seed;
  std::string out_dir = default_out();
  std::string format = "text";
  unsigned jobs = 1;
  run->add_option("scenario", files, "Scenario file(s)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out_dir, "Output directory (default $GSMLAB_OUT or ./gsmlab-out)");
  run->add_option("--format", format, "Report printed to stdout")->check(CLI::IsMember({"text", "matrix"}));
  run->add_option("--jobs", jobs, "Scenarios run in parallel")->check(CLI::Range(1u, 64u));

  // tmto
  auto* tmto = app.add_subcommand("tmto", "Rainbow table tools");
  tmto->require_subcommand(1);
  auto* build = tmto->add_subcommand("build", "Build a table and save it");
  auto* lookup = tmto->add_subcommand("lookup", "Look a keystream prefix up in a saved table");
  std::string table_file;
  attack::RainbowParams rp;
  std::string cipher_name = "A5_1";
  unsigned threads = 0;
  build->add_option("table", table_file)->required();
  build->add_option("--keyspace-bits", rp.keyspace_bits)->check(CLI::Range(1u, 24u));
  build->add_option("--chain-length", rp.chain_length);
  build->add_option("--chain-count", rp.chain_count);
  build->add_option("--color-count", rp.color_count);
  build->add_option("--seed", rp.seed);
  build->add_option("--frame", rp.frame);
  build->add_option("--cipher", cipher_name)->check(CLI::IsMember({"A5_1", "A5_2"}));
  build->add_option("--threads", threads, "0 = all cores");

  std::string ks_prefix, ks_verify, demo_kc;
  lookup->add_option("table", table_file)->required()->check(CLI::ExistingFile);
  auto* o_prefix = lookup->add_option("--keystream", ks_prefix, "keyspace_bits keystream bits of the table frame");
  lookup->add_option("--verify", ks_verify, "Keystream bits of the next frame");
  auto* o_kc = lookup->add_option("--kc", demo_kc, "Derive both keystreams from this key (hex) instead");
  o_prefix->excludes(o_kc);

  // trace
  auto* trace = app.add_subcommand("trace", "Trace tools");
  trace->require_subcommand(1);
  auto* diff = trace->add_subcommand("diff", "Compare two trace files line by line");
  std::string ta, tb;
  diff->add_option("a", ta)->required()->check(CLI::ExistingFile);
  diff->add_option("b", tb)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      std::vector<lab::Scenario> scenarios;
      for (const auto& f : files) {
        try {
          auto s = lab::parse_scenario(slurp(f));
          if (seed) s.seed = *seed;
          scenarios.push_back(std::move(s));
        } catch (const lab::ParseError& e) {
          std::cerr << f << ": " << e.what() << '\n';
          return 2;
        }
      }
      fs::create_directories(out_dir);
      std::vector<lab::RunReport> reports(scenarios.size());
      for (std::size_t b = 0; b < scenarios.size(); b += jobs) {
        std::vector<std::future<lab::RunReport>> batch;
        for (std::size_t i = b; i < std::min(scenarios.size(), b + jobs); ++i)
          batch.push_back(std::async(std::launch::async, [&s = scenarios[i]] { return lab::run_scenario(s); }));
        for (std::size_t i = 0; i < batch.size(); ++i) reports[b + i] = batch[i].get();
      }
      for (auto& r : reports) {
        r.trace_file = r.scenario + ".trace.txt";
        spit(fs::path(out_dir) / r.trace_file, lab::render_trace(r));
        spit(fs::path(out_dir) / (r.scenario + ".report.txt"), lab::render_report(r, lab::Format::Text));
      }
      if (format == "matrix") {
        std::cout << lab::render_matrix(reports);
      } else {
        for (const auto& r : reports) std::cout << lab::render_report(r, lab::Format::Text);
      }
      return 0;
    }

    if (*build) {
      rp.cipher = *cipher::parse_suite(cipher_name);
      rp.validate();
      const auto t = attack::tmto_build(rp, threads);
      attack::save_table(table_file, t);
      std::printf("%s\nrows=%zu distinct_keys=%llu coverage=%.4f\n", attack::params_line(rp).c_str(), t.rows.size(),
                  static_cast<unsigned long long>(t.distinct_keys), t.coverage());
      return 0;
    }

    if (*lookup) {
      const auto t = attack::load_table(table_file);
      Bits prefix, verify;
      if (!demo_kc.empty()) {
        const auto kc = std::stoull(demo_kc, nullptr, 16);
        auto ks = [&](std::uint32_t frame) {
          return t.params.cipher == cipher::CipherSuite::A5_2 ? cipher::a52_keystream(kc, frame)
                                                              : cipher::a51_keystream(kc, frame);
        };
        const auto k0 = ks(t.params.frame), k1 = ks(t.params.frame + 1);
        prefix.assign(k0.bits.begin(), k0.bits.begin() + t.params.keyspace_bits);
        verify.assign(k1.bits.begin(), k1.bits.begin() + 64);
      } else if (!ks_prefix.empty()) {
        prefix = parse_bitstring(ks_prefix);
        verify = parse_bitstring(ks_verify);
      } else {
        std::cerr << "lookup needs --keystream or --kc\n";
        return 2;
      }
      if (prefix.size() != t.params.keyspace_bits) {
        std::cerr << "keystream prefix must have " << t.params.keyspace_bits << " bits\n";
        return 2;
      }
      const auto found = attack::tmto_lookup(t, prefix, verify);
      std::printf("candidates=%zu\n", found.size());
      for (auto k : found) std::printf("kc=0x%016llx\n", static_cast<unsigned long long>(k));
      return 0;
    }

    if (*diff) {
      const auto d = lab::diff_traces(slurp(ta), slurp(tb));
      for (const auto& l : d.lines) std::cout << l << '\n';
      std::cout << "differences=" << d.differences << '\n';
      return d.differences == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
