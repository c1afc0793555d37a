// Command-line front end: one subcommand per pipeline stage plus "all".
// Exit codes: 0 success, 1 usage or config error, 2 missing dependency,
// 3 data error, 4 remote provider failure.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "atlas/errors.hpp"
#include "atlas/pipeline.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  double eps = 0.0;
  std::size_t min_pts = 0;
  std::size_t k = 0;
  std::string strategy;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hashtag-filtered corpus analysis pipeline"};
  app.require_subcommand(1);

  Options opt;
  std::vector<CLI::App*> subs;
  std::vector<std::string> names = atlas::stage_names();
  names.push_back("all");

  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(
        name, name == "all" ? "run every stage in order" : "run the " + name + " stage");
    sub->add_option("--config", opt.config_path, "path to the run config")
        ->envname("ATLAS_CONFIG")
        ->required();
    sub->add_option("--out", opt.out_dir, "output directory override");
    sub->add_option("--eps", opt.eps, "density radius override");
    sub->add_option("--min-pts", opt.min_pts, "density neighbor floor override");
    sub->add_option("--k", opt.k, "evolution selections per year override");
    sub->add_option("--strategy", opt.strategy,
                    "evolution ranking override (similarity|frequency)");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  CLI::App* chosen = nullptr;
  std::string chosen_name;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) {
      chosen = subs[i];
      chosen_name = names[i];
      break;
    }
  }

  try {
    atlas::RunConfig config = atlas::RunConfig::load(opt.config_path);
    if (chosen->count("--out")) config.out_dir = opt.out_dir;
    if (chosen->count("--eps")) config.dbscan.eps = opt.eps;
    if (chosen->count("--min-pts")) config.dbscan.min_pts = opt.min_pts;
    if (chosen->count("--k")) config.evolution.k = opt.k;
    if (chosen->count("--strategy")) config.evolution.strategy = opt.strategy;
    config.dbscan.validate();
    config.evolution.validate();

    if (chosen_name == "all") {
      atlas::run_all(config);
    } else {
      atlas::run_stage(chosen_name, config);
    }
    return 0;
  } catch (const atlas::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const atlas::DependencyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const atlas::RemoteError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const atlas::Error& e) {
    // DataError and DomainError both land here: bad data either way.
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
