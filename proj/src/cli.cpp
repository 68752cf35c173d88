#include "tcpr/cli.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tcpr/episodes.hpp"
#include "tcpr/feature_bank.hpp"
#include "tcpr/report_io.hpp"
#include "tcpr/simulation.hpp"

namespace tcpr {

namespace {

const std::map<std::string, TransformKind> kTransformNames = {
    {"none", TransformKind::none},
    {"l2", TransformKind::l2},
    {"cl2n", TransformKind::cl2n},
    {"zn", TransformKind::zn},
    {"tcpr", TransformKind::tcpr},
};

const std::map<std::string, CentroidEstimator::Kind> kCentroidNames = {
    {"oracle", CentroidEstimator::Kind::oracle},
    {"support", CentroidEstimator::Kind::support_mean},
    {"base-knn", CentroidEstimator::Kind::base_neighbors},
};

const std::map<std::string, ClassifierKind> kClassifierNames = {
    {"ncc", ClassifierKind::ncc},
    {"cosine", ClassifierKind::cosine},
};

const std::map<std::string, WeightInit> kInitNames = {
    {"ncc", WeightInit::ncc},
    {"random", WeightInit::random},
    {"zeros", WeightInit::zeros},
};

struct GenArgs {
  uint32_t classes = 2;
  uint32_t per_class = 100;
  uint32_t dim = 2;
  double scale = 1.0;
  double offset_mag = 0.0;
  uint32_t offset_axis = 2;
  double noise_std = 1.0;
  uint64_t seed = 0;
  std::string out;
};

struct InspectArgs {
  std::string bank;
};

// Everything evaluate and sweep-k share.
struct EvalArgs {
  std::string novel;
  std::string base;
  TransformKind transform = TransformKind::l2;
  CentroidEstimator::Kind centroid = CentroidEstimator::Kind::base_neighbors;
  uint32_t k_neighbors = 100;
  double p = 0.5;
  ClassifierKind classifier = ClassifierKind::ncc;
  double gamma = 10.0;
  double learning_rate = 0.01;
  uint32_t epochs = 100;
  WeightInit init = WeightInit::ncc;
  uint32_t n_way = 5;
  uint32_t k_shot = 1;
  uint32_t q_query = 15;
  uint32_t episodes = 2000;
  uint64_t seed = 0;
  uint32_t threads = 0;
  std::string out;
};

struct SweepArgs {
  EvalArgs eval;
  std::vector<uint32_t> k_list;
  std::string plot;
};

struct SimArgs {
  double a = 1.0;
  uint32_t k_shot = 1;
  uint32_t tasks = 10000;
  uint32_t q_query = 50;
  uint32_t bins = 20;
  uint64_t seed = 0;
  uint32_t threads = 0;
  std::string out;
  std::string plot;
};

// Options common to evaluate and sweep-k; sweep-k forces the transform, so
// it only registers the subset that still applies.
void add_eval_options(CLI::App* cmd, EvalArgs& args, bool with_transform) {
  cmd->add_option("--novel", args.novel, "Novel-class feature bank to sample episodes from")
      ->required();
  if (with_transform) {
    cmd->add_option("--base", args.base, "Base-class feature bank (cl2n mean, tcpr neighbors)");
    cmd->add_option("--transform", args.transform, "Feature transform")
        ->transform(CLI::CheckedTransformer(kTransformNames, CLI::ignore_case))
        ->default_str("l2");
    cmd->add_option("--centroid", args.centroid, "Task-centroid estimator for tcpr")
        ->transform(CLI::CheckedTransformer(kCentroidNames, CLI::ignore_case))
        ->default_str("base-knn");
    cmd->add_option("--k-neighbors", args.k_neighbors,
                    "Base neighbors retained by the base-knn estimator")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
  } else {
    cmd->add_option("--base", args.base, "Base-class feature bank")->required();
  }
  cmd->add_option("--p", args.p, "Similarity exponent for neighbor weights")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--classifier", args.classifier, "Episode classifier")
      ->transform(CLI::CheckedTransformer(kClassifierNames, CLI::ignore_case))
      ->default_str("ncc");
  cmd->add_option("--gamma", args.gamma, "Cosine-logit scale")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--lr", args.learning_rate, "Learning rate (cosine classifier)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--epochs", args.epochs, "Training epochs (cosine classifier)")
      ->capture_default_str();
  cmd->add_option("--init", args.init, "Weight init (cosine classifier)")
      ->transform(CLI::CheckedTransformer(kInitNames, CLI::ignore_case))
      ->default_str("ncc");
  cmd->add_option("--n-way", args.n_way, "Classes per episode")
      ->check(CLI::Range(2u, 1000000u))
      ->capture_default_str();
  cmd->add_option("--k-shot", args.k_shot, "Support samples per class")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--q", args.q_query, "Query samples per class")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--episodes", args.episodes, "Number of episodes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", args.seed, "Master seed")->capture_default_str();
  cmd->add_option("--threads", args.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  cmd->add_option("--out", args.out, "Output CSV path")->required();
}

EvalConfig make_eval_config(const EvalArgs& args, std::optional<uint32_t> k_override) {
  EvalConfig config;
  config.n_way = args.n_way;
  config.k_shot = args.k_shot;
  config.q_query = args.q_query;
  config.episodes = args.episodes;
  config.pipeline.transform = args.transform;
  config.pipeline.estimator.kind = args.centroid;
  config.pipeline.estimator.k = k_override.value_or(args.k_neighbors);
  config.pipeline.estimator.p = static_cast<float>(args.p);
  config.classifier = args.classifier;
  config.train.gamma = static_cast<float>(args.gamma);
  config.train.learning_rate = static_cast<float>(args.learning_rate);
  config.train.epochs = args.epochs;
  config.train.init = args.init;
  config.train.seed = args.seed;
  config.threads = args.threads;
  return config;
}

int run_gen(const GenArgs& args) {
  SyntheticBankSpec spec;
  spec.num_classes = args.classes;
  spec.per_class = args.per_class;
  spec.dim = args.dim;
  spec.class_mean_scale = static_cast<float>(args.scale);
  spec.noise_std = static_cast<float>(args.noise_std);
  spec.seed = args.seed;
  if (args.offset_mag != 0.0) {
    if (args.offset_axis >= args.dim) {
      std::cerr << "error: --offset-axis " << args.offset_axis
                << " is out of range for --dim " << args.dim << "\n";
      return 1;
    }
    spec.shared_offset.assign(args.dim, 0.0f);
    spec.shared_offset[args.offset_axis] = static_cast<float>(args.offset_mag);
  }

  FeatureBank bank = generate_synthetic_bank(spec);
  save_bank(bank, args.out);
  std::cout << "wrote: " << args.out << " (samples=" << bank.size()
            << ", dim=" << bank.dim() << ", classes=" << bank.num_classes() << ")\n";
  return 0;
}

int run_inspect(const InspectArgs& args) {
  FeatureBank bank = load_bank(args.bank);
  std::size_t min_rows = bank.size();
  std::size_t max_rows = 0;
  for (uint32_t c = 0; c < bank.num_classes(); ++c) {
    min_rows = std::min(min_rows, bank.class_rows(c).size());
    max_rows = std::max(max_rows, bank.class_rows(c).size());
  }
  double norm_sum = 0.0;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    norm_sum += bank.row_norm(i);
  }
  std::cout << "bank: " << args.bank << "\n"
            << "samples: " << bank.size() << "\n"
            << "dim: " << bank.dim() << "\n"
            << "classes: " << bank.num_classes() << "\n"
            << "rows_per_class: min=" << min_rows << " max=" << max_rows << "\n"
            << "mean_row_norm: "
            << format_fixed(norm_sum / static_cast<double>(bank.size()), 6) << "\n";
  return 0;
}

// Exit-1 cross-flag checks shared by evaluate (sweep-k hard-codes a valid
// combination).
int check_eval_flags(const EvalArgs& args) {
  if (args.transform == TransformKind::cl2n && args.base.empty()) {
    std::cerr << "error: --base is required when --transform cl2n\n";
    return 1;
  }
  if (args.transform == TransformKind::tcpr &&
      args.centroid == CentroidEstimator::Kind::base_neighbors && args.base.empty()) {
    std::cerr << "error: --base is required when --transform tcpr --centroid base-knn\n";
    return 1;
  }
  return 0;
}

int run_evaluate(const EvalArgs& args) {
  if (int rc = check_eval_flags(args); rc != 0) return rc;

  FeatureBank novel = load_bank(args.novel);
  std::optional<FeatureBank> base;
  if (!args.base.empty()) base.emplace(load_bank(args.base));

  EvalConfig config = make_eval_config(args, std::nullopt);
  EvalReport report = evaluate(novel, base ? &*base : nullptr, config, args.seed);
  write_report_csv(report, args.out);

  std::cout << "mean_accuracy=" << format_fixed(report.mean_accuracy, 6)
            << " ci95_half_width=" << format_fixed(report.ci95_half_width, 6)
            << " completed=" << report.episode_index.size()
            << " failed=" << report.failed << "\n"
            << "wrote: " << args.out << ", " << args.out << ".summary\n";
  return 0;
}

int run_sweep(const SweepArgs& args) {
  FeatureBank novel = load_bank(args.eval.novel);
  FeatureBank base = load_bank(args.eval.base);

  ConfigEcho echo;
  echo.emplace_back("transform", "tcpr");
  echo.emplace_back("centroid", "base-knn");
  {
    std::string joined;
    for (std::size_t i = 0; i < args.k_list.size(); ++i) {
      if (i) joined += '|';
      joined += std::to_string(args.k_list[i]);
    }
    echo.emplace_back("k_list", joined);
  }
  echo.emplace_back("p", format_fixed(args.eval.p, 3));
  echo.emplace_back("classifier", std::string(classifier_kind_name(args.eval.classifier)));
  echo.emplace_back("gamma", format_fixed(args.eval.gamma, 3));
  echo.emplace_back("n_way", std::to_string(args.eval.n_way));
  echo.emplace_back("k_shot", std::to_string(args.eval.k_shot));
  echo.emplace_back("q_query", std::to_string(args.eval.q_query));
  echo.emplace_back("episodes", std::to_string(args.eval.episodes));
  echo.emplace_back("seed", std::to_string(args.eval.seed));

  std::vector<std::string> rows;
  PlotSeries series;
  series.name = "tcpr(base-knn)";
  // Every k sees the same master seed, hence the identical episode stream:
  // the sweep is a paired comparison.
  for (uint32_t k : args.k_list) {
    EvalArgs cur = args.eval;
    cur.transform = TransformKind::tcpr;
    cur.centroid = CentroidEstimator::Kind::base_neighbors;
    EvalConfig config = make_eval_config(cur, k);
    EvalReport report = evaluate(novel, &base, config, args.eval.seed);
    rows.push_back(std::to_string(k) + "," + format_fixed(report.mean_accuracy, 6) + "," +
                   format_fixed(report.ci95_half_width, 6) + "," +
                   std::to_string(report.episode_index.size()) + "," +
                   std::to_string(report.failed));
    series.x.push_back(static_cast<double>(k));
    series.y.push_back(report.mean_accuracy);
    std::cout << "k=" << k << " mean_accuracy=" << format_fixed(report.mean_accuracy, 6)
              << " ci95_half_width=" << format_fixed(report.ci95_half_width, 6) << "\n";
  }
  write_csv(args.eval.out, echo, "k,mean_accuracy,ci95_half_width,completed,failed", rows);
  std::cout << "wrote: " << args.eval.out << "\n";
  if (!args.plot.empty()) {
    emit_plot(args.plot, "Accuracy vs retained neighbors", "k (neighbors)",
              "mean accuracy", {series}, echo);
    std::cout << "wrote: " << args.plot << "\n";
  }
  return 0;
}

int run_simulate(const SimArgs& args) {
  SimSpec spec;
  spec.a = args.a;
  spec.k_shot = args.k_shot;
  spec.n_tasks = args.tasks;
  spec.q_query = args.q_query;
  spec.bins = args.bins;
  spec.seed = args.seed;
  spec.threads = args.threads;

  BiasCurve curve = run_bias_simulation(spec);

  ConfigEcho echo;
  echo.emplace_back("a", format_fixed(args.a, 4));
  echo.emplace_back("k_shot", std::to_string(args.k_shot));
  echo.emplace_back("n_tasks", std::to_string(args.tasks));
  echo.emplace_back("q_query", std::to_string(args.q_query));
  echo.emplace_back("bins", std::to_string(args.bins));
  echo.emplace_back("seed", std::to_string(args.seed));

  write_curve_csv(curve, args.out, echo);
  std::cout << "tasks=" << curve.n_tasks << " stat_range=["
            << format_fixed(curve.stat_min, 6) << "," << format_fixed(curve.stat_max, 6)
            << "]\n"
            << "wrote: " << args.out << "\n";
  if (!args.plot.empty()) {
    PlotSeries series;
    series.name = "K=" + std::to_string(args.k_shot);
    for (std::size_t b = 0; b < curve.bin_center.size(); ++b) {
      if (curve.count[b] == 0) continue;  // no tasks, no point to plot
      series.x.push_back(curve.bin_center[b]);
      series.y.push_back(curve.mean_accuracy[b]);
    }
    emit_plot(args.plot, "Accuracy vs prototype drift", "prototype drift",
              "mean task accuracy", {series}, echo);
    std::cout << "wrote: " << args.plot << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Feature-space few-shot evaluation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tcpr 1.0.0");

  GenArgs gen;
  CLI::App* gen_cmd =
      app.add_subcommand("gen-synthetic", "Generate a Gaussian-mixture feature bank");
  gen_cmd->add_option("--classes", gen.classes, "Number of classes")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--per-class", gen.per_class, "Samples per class")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--dim", gen.dim, "Feature dimension")
      ->check(CLI::Range(2u, 1000000u))
      ->capture_default_str();
  gen_cmd->add_option("--scale", gen.scale, "Distance of class means from the origin")
      ->capture_default_str();
  gen_cmd->add_option("--offset-mag", gen.offset_mag, "Shared offset magnitude")
      ->capture_default_str();
  gen_cmd->add_option("--offset-axis", gen.offset_axis, "Axis carrying the shared offset")
      ->capture_default_str();
  gen_cmd->add_option("--noise-std", gen.noise_std, "Per-coordinate noise std")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Generation seed")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output bank path (.csv for CSV, else binary)")
      ->required();

  InspectArgs inspect;
  CLI::App* inspect_cmd = app.add_subcommand("inspect", "Summarize a feature bank");
  inspect_cmd->add_option("bank", inspect.bank, "Feature bank path")->required();

  EvalArgs eval;
  CLI::App* eval_cmd =
      app.add_subcommand("evaluate", "Run an episodic few-shot evaluation");
  add_eval_options(eval_cmd, eval, /*with_transform=*/true);

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep-k", "Evaluate tcpr(base-knn) across neighbor counts");
  add_eval_options(sweep_cmd, sweep.eval, /*with_transform=*/false);
  sweep_cmd->add_option("--k-list", sweep.k_list, "Comma-separated neighbor counts")
      ->required()
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--plot", sweep.plot, "Optional SVG plot path");

  SimArgs sim;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Monte-Carlo prototype-bias simulation");
  sim_cmd->add_option("--a", sim.a, "Half class-mean separation")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cmd->add_option("--k-shot", sim.k_shot, "Samples per prototype")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cmd->add_option("--tasks", sim.tasks, "Number of tasks")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cmd->add_option("--q", sim.q_query, "Queries per class per task")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sim_cmd->add_option("--bins", sim.bins, "Equal-width bins over the drift statistic")
      ->check(CLI::Range(2u, 100000u))
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Simulation seed")->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Output curve CSV path")->required();
  sim_cmd->add_option("--plot", sim.plot, "Optional SVG plot path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(gen_cmd)) return run_gen(gen);
    if (app.got_subcommand(inspect_cmd)) return run_inspect(inspect);
    if (app.got_subcommand(eval_cmd)) return run_evaluate(eval);
    if (app.got_subcommand(sweep_cmd)) return run_sweep(sweep);
    if (app.got_subcommand(sim_cmd)) return run_simulate(sim);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace tcpr
