// Batch front end: grow chains, draw point samples, run experiments, render reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "microxi/microxi.hpp"

using namespace microxi;
namespace fs = std::filesystem;

namespace {

// With one replica the output goes to `out` itself; otherwise replica r goes to <stem>_<r><ext>.
std::string replica_path(const std::string& out, std::size_t r, std::size_t replicas) {
  if (replicas == 1) return out;
  const fs::path p(out);
  return (p.parent_path() / (p.stem().string() + "_" + std::to_string(r) + p.extension().string())).string();
}

template <class Write>
void emit(const std::string& out, std::size_t r, std::size_t replicas, Write write) {
  if (out.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(replica_path(out, r, replicas));
  if (!f) fail(ErrorKind::InvalidArgument, "cannot open output file");
  write(f);
}

void write_text(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) fail(ErrorKind::InvalidArgument, "cannot open output file");
  f << text;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::InvalidArgument, "cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

// key=value, where value is JSON if it parses and a string otherwise.
void apply_param(nlohmann::json& params, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorKind::InvalidSpec, "--param expects key=value, got '" + kv + "'");
  const auto key = kv.substr(0, eq), val = kv.substr(eq + 1);
  auto parsed = nlohmann::json::parse(val, nullptr, false);
  params[key] = parsed.is_discarded() ? nlohmann::json(val) : parsed;
}

const char* window_key(const std::string& kind) { return kind == "stieltjes" ? "A" : "L"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"microxi: virtual isometries, the sine process and their closed-form checks"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::size_t replicas = 1, n = 64, workers = 1;
  double window = 5.0;
  std::string out, config;
  bool allow_near_axis = false;

  auto* simulate = app.add_subcommand("simulate", "grow virtual-isometry spectra and dump eigenangles as CSV");
  simulate->add_option("--seed", seed, "master seed");
  simulate->add_option("--replicas", replicas, "number of independent chains")->check(CLI::PositiveNumber);
  simulate->add_option("--n", n, "final dimension")->check(CLI::PositiveNumber);
  std::vector<std::size_t> snapshots;
  simulate->add_option("--snapshot", snapshots, "also dump the spectrum at these dimensions");
  simulate->add_option("--out", out, "output CSV (replica index appended when replicas > 1)");

  auto* sample = app.add_subcommand("sample", "draw sine-process point samples on [-window, window]");
  std::string sampler = "dpp";
  std::size_t mesh = 0;
  sample->add_option("--seed", seed, "master seed");
  sample->add_option("--replicas", replicas, "number of samples")->check(CLI::PositiveNumber);
  sample->add_option("--window", window, "half-width A of the window")->check(CLI::PositiveNumber);
  sample->add_option("--sampler", sampler, "dpp or coupling")->check(CLI::IsMember({"dpp", "coupling"}));
  sample->add_option("--n", n, "matrix dimension for the coupling sampler")->check(CLI::PositiveNumber);
  sample->add_option("--mesh", mesh, "quadrature mesh for the DPP sampler (0 = default)");
  sample->add_option("--out", out, "output CSV (replica index appended when replicas > 1)");

  auto* verify = app.add_subcommand("verify", "run an experiment and compare it to its closed form");
  std::string kind;
  std::vector<std::string> params;
  verify->add_option("kind", kind, "experiment kind")->check(CLI::IsMember(ExperimentSpec::kinds()));
  verify->add_option("--config", config, "JSON experiment spec; flags given explicitly override it");
  auto* o_seed = verify->add_option("--seed", seed, "master seed");
  auto* o_reps = verify->add_option("--replicas", replicas, "number of replicas")->check(CLI::PositiveNumber);
  auto* o_n = verify->add_option("--n", n, "matrix dimension")->check(CLI::PositiveNumber);
  auto* o_window = verify->add_option("--window", window, "window length L (half-width A for stieltjes)");
  auto* o_workers = verify->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  verify->add_option("--param", params, "extra parameter key=value, value as JSON (e.g. z=[0,1])");
  verify->add_flag("--allow-near-axis", allow_near_axis, "permit points with |Im z| < 0.25");
  verify->add_option("--out", out, "write the report JSON here instead of stdout");

  auto* report = app.add_subcommand("report", "render saved report JSON files as CSV or canonical JSON");
  std::vector<std::string> inputs;
  std::string format = "csv";
  report->add_option("files", inputs, "report JSON files (object or array of objects)")->required();
  report->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  report->add_option("--out", out, "output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      for (std::size_t r = 0; r < replicas; ++r) {
        SpectralChain chain(seed, r);
        std::vector<std::size_t> dims = snapshots;
        dims.push_back(n);
        std::sort(dims.begin(), dims.end());
        dims.erase(std::unique(dims.begin(), dims.end()), dims.end());
        emit(out, r, replicas, [&](std::ostream& os) {
          for (auto d : dims) {
            chain.extend_to(d);
            chain.spectrum().write_csv(os, seed);
          }
        });
      }
    } else if (*sample) {
      std::optional<DppSampler> dpp;
      if (sampler == "dpp") dpp.emplace(window, mesh);
      const auto draws = run_replicas(
          [&](SeededStream& s) { return dpp ? dpp->sample(s) : sample_via_coupling(n, window, s); }, replicas, seed, 1);
      for (std::size_t r = 0; r < replicas; ++r)
        emit(out, r, replicas, [&](std::ostream& os) { draws[r].write_csv(os); });
    } else if (*verify) {
      ExperimentSpec spec;
      if (!config.empty()) spec = ExperimentSpec::from_json(read_json_file(config));
      if (!kind.empty()) spec.kind = kind;
      if (spec.kind.empty()) fail(ErrorKind::InvalidSpec, "verify needs a kind or a --config with one");
      if (*o_seed) spec.master_seed = seed;
      if (*o_reps) spec.replicas = replicas;
      if (*o_workers) spec.workers = workers;
      if (*o_n) spec.parameters["n"] = n;
      if (*o_window) spec.parameters[window_key(spec.kind)] = window;
      for (const auto& p : params) apply_param(spec.parameters, p);
      if (allow_near_axis) spec.parameters["allow_near_axis"] = true;
      spec.validate();
      const auto r = run_experiment(spec);
      write_text(out, r.to_json().dump(2) + "\n");
      const auto ok = r.passed();
      std::cerr << spec.kind << ": " << (ok ? (*ok ? "PASS" : "FAIL") : "no verdict") << "\n";
      return ok.value_or(true) ? 0 : 2;
    } else if (*report) {
      std::vector<EstimateReport> reports;
      for (const auto& path : inputs) {
        const auto j = read_json_file(path);
        if (j.is_array())
          for (const auto& e : j) reports.push_back(EstimateReport::from_json(e));
        else
          reports.push_back(EstimateReport::from_json(j));
      }
      std::string text;
      if (format == "csv") {
        text = EstimateReport::csv_header() + "\n";
        for (const auto& r : reports) text += r.csv_row() + "\n";
      } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : reports) arr.push_back(r.to_json());
        text = canonical_dump(reports.size() == 1 ? arr[0] : arr) + "\n";
      }
      write_text(out, text);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
