// Command-line front end: simulate, reconstruct, pipeline, compare.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 a pipeline stage
// failed (partial artifacts are left in the output directory).

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dbareit/dn_map.hpp"
#include "dbareit/pipeline.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kStageError = 2;

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::string output;
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config, "INI run configuration")->check(CLI::ExistingFile);
  cmd->add_option("-s,--set", o.overrides, "override a config key: section.key=value");
  cmd->add_option("-o,--output", o.output, "output directory (overrides run.output)");
  cmd->add_option("-j,--workers", o.workers, "worker threads (overrides run.workers)");
}

dbareit::RunConfig load_config(const CommonOptions& o) {
  std::vector<std::string> overrides = o.overrides;
  if (!o.output.empty()) overrides.push_back("run.output=" + o.output);
  if (o.workers > 0) overrides.push_back("run.workers=" + std::to_string(o.workers));
  if (o.config.empty()) return dbareit::RunConfig::from_overrides(overrides);
  return dbareit::RunConfig::load(o.config, overrides);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct D-bar reconstruction of complex admittivity from EIT data"};
  app.require_subcommand(1);

  CommonOptions sim_opts, rec_opts, pipe_opts;
  std::string rec_input;
  std::string cmp_a, cmp_b;

  auto* sim = app.add_subcommand("simulate", "forward problem: mesh, voltages and DN matrices");
  add_common(sim, sim_opts);
  auto* rec = app.add_subcommand("reconstruct", "reconstruct from dn_gamma.csv / dn_one.csv");
  add_common(rec, rec_opts);
  rec->add_option("-i,--input", rec_input, "directory holding the DN files")
      ->required()
      ->check(CLI::ExistingDirectory);
  auto* pipe = app.add_subcommand("pipeline", "simulate and reconstruct end to end");
  add_common(pipe, pipe_opts);
  auto* cmp = app.add_subcommand("compare", "compare artifacts of two runs");
  cmp->add_option("run_a", cmp_a)->required()->check(CLI::ExistingDirectory);
  cmp->add_option("run_b", cmp_b)->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  dbareit::RunConfig cfg;
  try {
    if (*sim) cfg = load_config(sim_opts);
    if (*rec) cfg = load_config(rec_opts);
    if (*pipe) cfg = load_config(pipe_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (*sim) {
      dbareit::simulate(cfg, cfg.output);
      std::cout << "wrote " << cfg.output.string() << "\n";
    } else if (*rec) {
      std::cout << dbareit::run_reconstruct(cfg, rec_input);
    } else if (*pipe) {
      std::cout << dbareit::run_pipeline(cfg);
    } else if (*cmp) {
      const auto diffs = dbareit::compare_runs(cmp_a, cmp_b);
      std::printf("%-20s %10s %14s %14s %s\n", "file", "values", "sup_norm", "rel_l2",
                  "bytes");
      for (const auto& d : diffs) {
        std::printf("%-20s %10zu %14.6e %14.6e %s\n", d.file.c_str(), d.values, d.sup_norm,
                    d.relative_l2, d.identical_bytes ? "identical" : "differ");
      }
    }
  } catch (const dbareit::StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kStageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return *cmp ? kUsageError : kStageError;
  }
  return 0;
}
