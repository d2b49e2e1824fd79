#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tailgen/config.hpp"
#include "tailgen/dataset.hpp"
#include "tailgen/errors.hpp"
#include "tailgen/pipeline.hpp"

namespace {

void apply_backend_overrides(tailgen::PipelineConfig& cfg,
                             const std::vector<std::string>& overrides) {
  for (const auto& spec : overrides) {
    auto eq = spec.find('=');
    if (eq == std::string::npos) {
      throw tailgen::ValidationError("--backend expects <slot>=<mock|http>, got '" + spec +
                                     "'");
    }
    tailgen::set_option(cfg, "backend." + spec.substr(0, eq), spec.substr(eq + 1));
  }
}

void print_summary(const tailgen::RunSummary& summary) {
  std::cout << summary.to_text();
  const auto& t = summary.tallies;
  std::cout << "backend_calls";
  for (int i = 0; i < tailgen::kRequestKindCount; ++i) {
    auto kind = static_cast<tailgen::RequestKind>(i);
    std::cout << ' ' << tailgen::kind_name(kind) << '=' << t.for_kind(kind);
  }
  std::cout << " cache_hits=" << t.cache_hits << " retries=" << t.retries << '\n';
}

void print_stats(const tailgen::DatasetManifest& manifest) {
  tailgen::SplitStats stats = tailgen::split_stats(manifest);
  std::cout << "classes\t" << manifest.num_classes << '\n';
  std::cout << "many\t" << stats.many_count << '\n';
  std::cout << "medium\t" << stats.medium_count << '\n';
  std::cout << "few\t" << stats.few_count << '\n';
  char buf[32];
  if (std::isfinite(stats.imbalance_factor)) {
    std::snprintf(buf, sizeof buf, "%.6f", stats.imbalance_factor);
  } else {
    std::snprintf(buf, sizeof buf, "inf");
  }
  std::cout << "imbalance_factor\t" << buf << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"long-tail dataset curation and augmentation pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string manifest_path;
  std::string out_dir;
  std::vector<std::string> backend_overrides;
  int mix_num = 0;
  std::uint64_t mix_seed = 0;

  CLI::App* run = app.add_subcommand("run", "execute a full generation run");
  run->add_option("--config", config_path, "pipeline config file (defaults apply if omitted)");
  run->add_option("--manifest", manifest_path, "dataset manifest TSV")->required();
  run->add_option("--out", out_dir, "output run directory")->required();
  run->add_option("--backend", backend_overrides,
                  "override a backend slot, e.g. --backend generate=http");

  CLI::App* resume = app.add_subcommand("resume", "continue an interrupted run");
  resume->add_option("--out", out_dir, "existing run directory")->required();

  CLI::App* emit = app.add_subcommand("emit-mix", "re-emit mixed samples from a finished run");
  emit->add_option("--out", out_dir, "existing run directory")->required();
  emit->add_option("--num", mix_num, "number of samples")->required();
  emit->add_option("--seed", mix_seed, "emission seed")->required();

  CLI::App* stats = app.add_subcommand("stats", "report manifest split statistics");
  stats->add_option("--manifest", manifest_path, "dataset manifest TSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      tailgen::PipelineConfig cfg;
      if (!config_path.empty()) cfg = tailgen::load_config(config_path);
      apply_backend_overrides(cfg, backend_overrides);
      cfg.validate();
      print_summary(tailgen::run_pipeline(cfg, manifest_path, out_dir));
    } else if (resume->parsed()) {
      print_summary(tailgen::resume_run(out_dir));
    } else if (emit->parsed()) {
      tailgen::RunSummary summary = tailgen::emit_mix_only(out_dir, mix_num, mix_seed);
      std::cout << "mixed_emitted\t" << summary.mixed_emitted << '\n';
    } else if (stats->parsed()) {
      print_stats(tailgen::load_manifest(manifest_path));
    }
  } catch (const tailgen::BackendError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return 3;
  } catch (const tailgen::IntegrityError& e) {
    std::cerr << "integrity error: " << e.what() << '\n';
    return 2;
  } catch (const tailgen::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
