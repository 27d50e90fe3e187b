// Command-line driver: ingest, synth, gan-train, translate, clf-train,
// experiment, report.

#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "nbi/cli/commands.hpp"
#include "nbi/common/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Cycle-GAN WLI/NBI translation and classification experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  bool per_fold_gan = false;

  auto with_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "override the configured seed");
    cmd->add_option("--out", out_dir, "override the output directory");
    cmd->add_flag("--per-fold-gan", per_fold_gan, "one translation model per cross-validation fold");
  };

  auto* ingest = app.add_subcommand("ingest", "validate manifests and print per-domain label counts");
  std::vector<std::string> manifests;
  int image_side = 256;
  ingest->add_option("manifests", manifests, "manifest files")->required();
  ingest->add_option("--image-side", image_side, "expected patch side");

  auto* synth = app.add_subcommand("synth", "write a synthetic two-domain corpus");
  int side = 64, per_class = 48, patients = 12;
  std::uint64_t synth_seed = 0;
  synth->add_option("--out", out_dir, "target directory")->required();
  synth->add_option("--side", side);
  synth->add_option("--per-class", per_class);
  synth->add_option("--patients", patients);
  synth->add_option("--seed", synth_seed);

  auto* gan = app.add_subcommand("gan-train", "train the translation model(s)");
  with_config(gan);

  auto* translate = app.add_subcommand("translate", "export a translated dataset");
  with_config(translate);
  std::string direction;
  std::optional<int> fold;
  translate->add_option("--direction", direction, "wli2nbi | nbi2wli")->required();
  translate->add_option("--fold", fold, "fold model to use with --per-fold-gan");

  auto* clf = app.add_subcommand("clf-train", "train one classifier on a composition");
  with_config(clf);
  std::string train_tags, arch = "vggf";
  clf->add_option("--train", train_tags, "composition, e.g. WLI+WLI_f")->required();
  clf->add_option("--arch", arch, "alexnet | vggf | vgg16");
  clf->add_option("--fold", fold, "train on the patients outside this fold");

  auto* experiment = app.add_subcommand("experiment", "cross-validate one experiment");
  with_config(experiment);
  std::string experiment_id;
  std::string archs = "all";
  experiment->add_option("--experiment", experiment_id, "E1 | E2a | E2b | E3a | E3b")->required();
  experiment->add_option("--arch", archs, "alexnet | vggf | vgg16 | all");

  auto* report = app.add_subcommand("report", "aggregate finished experiments");
  std::string report_experiment;
  report->add_option("--out", out_dir, "run directory")->required();
  report->add_option("--experiment", report_experiment, "only this experiment");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      std::vector<std::filesystem::path> paths(manifests.begin(), manifests.end());
      return nbi::cli::cmd_ingest(paths, image_side, std::cout, std::cerr);
    }
    if (synth->parsed())
      return nbi::cli::cmd_synth(out_dir, side, per_class, patients, synth_seed, std::cout);
    if (report->parsed()) {
      std::optional<nbi::experiments::ExperimentId> id;
      if (!report_experiment.empty()) {
        id = nbi::experiments::parse_experiment_id(report_experiment);
        if (!id) throw nbi::ValidationError("unknown experiment '" + report_experiment + "'");
      }
      return nbi::cli::cmd_report(out_dir, id, std::cout);
    }

    auto config = nbi::cli::load_run_config(config_path);
    if (seed) config.set_seed(*seed);
    if (!out_dir.empty()) config.output = out_dir;
    if (per_fold_gan) config.experiment.per_fold_gan = true;
    nbi::cli::Workspace ws(std::move(config));

    if (gan->parsed()) return nbi::cli::cmd_gan_train(ws, std::cout);
    if (translate->parsed()) {
      const auto d = nbi::translation::parse_direction(direction);
      if (!d) throw nbi::ValidationError("unknown direction '" + direction + "' (wli2nbi|nbi2wli)");
      return nbi::cli::cmd_translate(ws, *d, fold, std::cout);
    }
    if (clf->parsed()) {
      const auto tags = nbi::data::parse_tag_set(train_tags);
      if (!tags) throw nbi::ValidationError("bad composition '" + train_tags + "'");
      return nbi::cli::cmd_clf_train(ws, *tags, nbi::cli::parse_architectures(arch).at(0), fold, std::cout);
    }
    if (experiment->parsed()) {
      const auto id = nbi::experiments::parse_experiment_id(experiment_id);
      if (!id) throw nbi::ValidationError("unknown experiment '" + experiment_id + "'");
      return nbi::cli::cmd_experiment(ws, *id, nbi::cli::parse_architectures(archs), std::cout);
    }
  } catch (const nbi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nbi::exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
