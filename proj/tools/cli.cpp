#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "arknls/io.hpp"
#include "arknls/solver.hpp"
#include "arknls/synth.hpp"

namespace arknls::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

SynthSpec parse_synthetic(const std::string& text, std::uint64_t seed) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) parts.push_back(tok);
  if (parts.size() != 5) {
    throw UsageError("--synthetic expects m,n,rank,noise,sparsity, got '" + text + "'");
  }
  SynthSpec spec;
  try {
    std::size_t used = 0;
    auto count = [&](const std::string& s) {
      const unsigned long long v = std::stoull(s, &used);
      if (used != s.size() || s.front() == '-') throw std::invalid_argument(s);
      return static_cast<std::size_t>(v);
    };
    auto real = [&](const std::string& s) {
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    };
    spec.m = count(parts[0]);
    spec.n = count(parts[1]);
    spec.true_rank = count(parts[2]);
    spec.noise_std = real(parts[3]);
    spec.sparsity = real(parts[4]);
  } catch (const std::logic_error&) {
    throw UsageError("--synthetic: malformed number in '" + text + "'");
  }
  spec.seed = seed;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--synthetic: ") + e.what());
  }
  return spec;
}

Matrix load_input(const std::optional<std::string>& path, const std::optional<SynthSpec>& spec) {
  if (path) return read_matrix_market(*path);
  if (spec->sparsity > 0.0) return gen_sparse(*spec);
  return gen_dense(*spec);
}

std::filesystem::path rep_path(const std::filesystem::path& base, int rep, int reps) {
  if (reps == 1) return base;
  std::filesystem::path p = base;
  p.replace_filename(base.stem().string() + ".rep" + std::to_string(rep) +
                     base.extension().string());
  return p;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rank-k alternating NNLS factorization benchmark", "arknls"};

  std::optional<std::string> input;
  std::optional<std::string> synthetic;
  std::size_t rank = 0;
  SolverConfig config;
  std::optional<double> time_limit;
  std::optional<double> tol;
  std::uint64_t seed = 0;
  int reps = 1;
  std::optional<std::string> out_path;
  bool summary = false;
  bool no_timing = false;

  auto* input_opt = app.add_option("--input", input, "Matrix Market file holding A")
                        ->check(CLI::ExistingFile);
  auto* synth_opt =
      app.add_option("--synthetic", synthetic, "Generate A from m,n,rank,noise,sparsity");
  input_opt->excludes(synth_opt);
  app.add_option("--rank", rank, "Factorization rank r")->required()->check(CLI::PositiveNumber);
  app.add_option("--k", config.k, "Block width")->check(CLI::IsMember({1, 2, 3}))
      ->capture_default_str();
  app.add_option("--max-sweeps", config.max_sweeps, "Maximum number of sweeps")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--time-limit", time_limit, "Wall-clock budget in seconds")
      ->check(CLI::PositiveNumber);
  app.add_option("--tol", tol, "Stop when the residual changes by less than this")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Base seed; repetition i uses seed + i")->capture_default_str();
  app.add_option("--reps", reps, "Number of repetitions")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--out", out_path,
                 "Trace CSV path; with --reps > 1 each run writes NAME.repI.csv");
  app.add_flag("--summary", summary, "Print mean and std of the final residual over reps");
  app.add_flag("--no-timing", no_timing, "Write elapsed_s as 0 so traces are reproducible");

  std::optional<SynthSpec> spec;
  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    if (!input && !synthetic) throw UsageError("one of --input or --synthetic is required");
    if (synthetic) spec = parse_synthetic(*synthetic, seed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  config.time_limit = time_limit;
  config.tol_residual_change = tol;

  try {
    const Matrix a = load_input(input, spec);
    std::vector<double> finals;
    std::vector<double> times;
    for (int rep = 0; rep < reps; ++rep) {
      config.seed = seed + static_cast<std::uint64_t>(rep);
      FitResult result = fit(a, rank, config);
      if (no_timing) {
        for (auto& rec : result.trace.records) rec.elapsed_s = 0.0;
      }
      const TraceRecord& last = result.trace.records.back();
      finals.push_back(last.rel_residual);
      times.push_back(last.elapsed_s);
      if (out_path) write_trace_csv(result.trace, rep_path(*out_path, rep, reps));
      if (!summary) {
        out << "rep=" << rep << " seed=" << config.seed << " sweeps=" << last.sweep
            << " final_rel_residual=" << fmt("%.10g", last.rel_residual)
            << " time_s=" << fmt("%.6g", last.elapsed_s) << '\n';
      }
    }
    if (summary) {
      auto mean = [](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : x) s += v;
        return s / static_cast<double>(x.size());
      };
      const double mu = mean(finals);
      double var = 0.0;
      for (double v : finals) var += (v - mu) * (v - mu);
      const double sd = std::sqrt(var / static_cast<double>(finals.size()));
      out << "k=" << config.k << " rank=" << rank
          << " final_rel_residual=" << fmt("%.6g", mu) << "±" << fmt("%.2g", sd)
          << " time_s=" << fmt("%.6g", mean(times)) << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace arknls::cli
