#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hbm/commands.hpp"
#include "hbm/config.hpp"
#include "hbm/errors.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

template <class T>
void override_field(nlohmann::json& cfg, const char* section, const char* key, const std::optional<T>& v) {
  if (v) cfg[section][key] = *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical blockmodel for knowledge graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hbm::version()));

  // gen-sbt
  auto* gen = app.add_subcommand("gen-sbt", "Generate a synthetic binary tree graph with ground truth");
  hbm::GenSbtOptions gen_opts;
  gen->add_option("--depth", gen_opts.sbt.depth, "Tree depth")->capture_default_str();
  gen->add_option("--per-leaf", gen_opts.sbt.entities_per_leaf, "Entities per leaf")->capture_default_str();
  gen->add_option("--probs", gen_opts.sbt.level_probs, "Edge probability by common-ancestor level")
      ->delimiter(',')
      ->capture_default_str();
  gen->add_option("--predicates", gen_opts.sbt.num_predicates, "Number of predicates")->capture_default_str();
  gen->add_option("--seed", gen_opts.seed, "Random seed")->required();
  gen->add_option("--out", gen_opts.out, "Output directory")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Run the Gibbs sampler");
  std::string config_path;
  std::optional<std::string> input, output, mode;
  std::optional<double> gamma, mu, sigma, lambda, eta;
  std::optional<int> depth, iterations, burn_in, lag, final_samples, chains;
  std::optional<std::uint64_t> seed;
  std::vector<double> alpha;
  bool no_subsample = false;
  fit->add_option("--config", config_path, "Run configuration JSON");
  fit->add_option("--input", input, "Triple file (TSV)");
  fit->add_option("--output", output, "Output directory");
  fit->add_option("--gamma", gamma);
  fit->add_option("--mu", mu);
  fit->add_option("--sigma", sigma);
  fit->add_option("--lambda", lambda);
  fit->add_option("--eta", eta);
  fit->add_option("--depth", depth);
  fit->add_option("--level-prior", mode, "stick or dirichlet");
  fit->add_option("--alpha", alpha, "Dirichlet level prior, one value per level")->delimiter(',');
  fit->add_option("--iterations", iterations);
  fit->add_option("--burn-in", burn_in);
  fit->add_option("--lag", lag);
  fit->add_option("--final-samples", final_samples);
  fit->add_option("--chains", chains);
  fit->add_option("--seed", seed);
  fit->add_flag("--no-subsample", no_subsample, "Resample every variable each iteration");

  // eval
  auto* ev = app.add_subcommand("eval", "Score a sample against ground truth labels");
  hbm::EvalOptions eval_opts;
  ev->add_option("--sample", eval_opts.sample, "Sample JSON")->required();
  ev->add_option("--truth", eval_opts.truth, "Ground truth TSV")->required();
  ev->add_option("--out", eval_opts.out, "Directory for metrics.json and metrics.txt");
  ev->add_flag("--truncate", eval_opts.truncate_at_level, "Stop each entity at its level mode");

  // render
  auto* render = app.add_subcommand("render", "Print a sample's hierarchy");
  std::string render_sample;
  std::size_t max_members = 5;
  render->add_option("--sample", render_sample, "Sample JSON")->required();
  render->add_option("--max-members", max_members, "Entity labels listed per community")->capture_default_str();

  // relations
  auto* rel = app.add_subcommand("relations", "Posterior mean community relations as CSV");
  std::string rel_sample;
  std::string rel_out;
  rel->add_option("--sample", rel_sample, "Sample JSON")->required();
  rel->add_option("--out", rel_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kUsageError;
  }

  try {
    if (*gen) {
      hbm::cmd_gen_sbt(gen_opts, std::cout);
    } else if (*fit) {
      nlohmann::json cfg = nlohmann::json::object();
      if (!config_path.empty()) {
        try {
          cfg = hbm::read_json_file(config_path);
        } catch (const hbm::ParseError& e) {
          throw hbm::ConfigError("config", e.what());
        }
        if (!cfg.is_object()) throw hbm::ConfigError("config", "expected a JSON object");
      }
      override_field(cfg, "io", "input", input);
      override_field(cfg, "io", "output", output);
      override_field(cfg, "model", "gamma", gamma);
      override_field(cfg, "model", "mu", mu);
      override_field(cfg, "model", "sigma", sigma);
      override_field(cfg, "model", "lambda", lambda);
      override_field(cfg, "model", "eta", eta);
      override_field(cfg, "model", "depth", depth);
      override_field(cfg, "model", "level_prior_mode", mode);
      if (!alpha.empty()) cfg["model"]["alpha"] = alpha;
      override_field(cfg, "schedule", "iterations", iterations);
      override_field(cfg, "schedule", "burn_in", burn_in);
      override_field(cfg, "schedule", "lag", lag);
      override_field(cfg, "schedule", "final_samples", final_samples);
      override_field(cfg, "schedule", "chains", chains);
      override_field(cfg, "schedule", "seed", seed);
      if (no_subsample) cfg["schedule"]["subsample"] = false;
      hbm::cmd_fit(hbm::RunConfig::from_json(cfg), std::cerr);
    } else if (*ev) {
      hbm::cmd_eval(eval_opts, std::cout);
    } else if (*render) {
      std::cout << hbm::render_tree(hbm::load_sample(render_sample), max_members);
    } else if (*rel) {
      const auto csv = hbm::relations_csv(hbm::load_sample(rel_sample));
      if (rel_out.empty()) {
        std::cout << csv;
      } else {
        hbm::write_text_file(rel_out, csv);
      }
    }
  } catch (const hbm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const hbm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return 0;
}
