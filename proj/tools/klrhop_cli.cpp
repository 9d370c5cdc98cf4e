// Command-line front end: train, recall, sharpness, spectrum, sweep, cross-section.
//
// Exit codes: 0 success, 2 parameter error, 3 training divergence, 4 I/O error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "klrhop/klrhop.hpp"

namespace {

using klrhop::Index;
using nlohmann::json;

constexpr int kExitParameter = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

struct TrainFlags {
  double lambda = 1e-4;
  double lr = 0.5;
  long epochs = 2000;
  double tol = 1e-6;
  std::string reg = "rkhs";
  std::string step = "backtracking";

  void add_to(CLI::App& cmd) {
    cmd.add_option("--lambda", lambda, "L2 regularization strength")->capture_default_str();
    cmd.add_option("--lr", lr, "gradient-descent learning rate")->capture_default_str();
    cmd.add_option("--epochs", epochs, "maximum training epochs")->capture_default_str();
    cmd.add_option("--tol", tol, "gradient infinity-norm tolerance")->capture_default_str();
    cmd.add_option("--reg", reg, "regularizer: rkhs | euclidean")->capture_default_str();
    cmd.add_option("--step", step, "step control: backtracking | fixed")->capture_default_str();
  }

  [[nodiscard]] klrhop::TrainConfig resolve() const {
    klrhop::TrainConfig tc;
    tc.reg_lambda = lambda;
    tc.learning_rate = lr;
    tc.max_epochs = epochs;
    tc.grad_tol = tol;
    tc.regularizer = klrhop::parse_regularizer(reg);
    tc.step_control = klrhop::parse_step_control(step);
    tc.validate();
    return tc;
  }
};

json train_config_json(const klrhop::TrainConfig& tc) {
  return {{"lambda", tc.reg_lambda},        {"lr", tc.learning_rate},
          {"epochs", tc.max_epochs},        {"tol", tc.grad_tol},
          {"reg", to_string(tc.regularizer)}, {"step", to_string(tc.step_control)}};
}

void print_config(const std::string& command, const json& config) {
  std::cerr << "# " << command << " resolved configuration\n";
  for (const auto& [key, value] : config.items()) std::cerr << "#   " << key << " = " << value.dump() << '\n';
}

/// "lo:hi:steps" (log-spaced when `log_axis`, else linear) or a comma list.
std::vector<double> parse_axis(const std::string& text, bool log_axis) {
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw klrhop::ParameterError("axis '" + text + "' must be lo:hi:steps");
    const double lo = std::stod(parts[0]);
    const double hi = std::stod(parts[1]);
    const int steps = std::stoi(parts[2]);
    return log_axis ? klrhop::log_space(lo, hi, steps) : klrhop::linear_space(lo, hi, steps);
  }
  std::vector<double> values;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) values.push_back(std::stod(item));
  if (values.empty()) throw klrhop::ParameterError("axis '" + text + "' is empty");
  return values;
}

json vector_json(const klrhop::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void emit(const json& result, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << result.dump(2) << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw klrhop::IoError("cannot open '" + out_path + "' for writing");
  out << result.dump(2) << '\n';
  std::cout << "wrote " << out_path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel logistic regression Hopfield network laboratory"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "train a network on random patterns and save it as JSON");
  Index n = 100;
  Index p = 10;
  double gamma = 0.01;
  std::uint64_t seed = 0;
  std::string out_path;
  TrainFlags train_flags;
  train->add_option("--n", n, "number of neurons N")->capture_default_str();
  train->add_option("--p", p, "number of patterns P")->capture_default_str();
  train->add_option("--gamma", gamma, "RBF width gamma")->capture_default_str();
  train->add_option("--seed", seed, "pattern seed")->capture_default_str();
  train->add_option("--out", out_path, "model JSON path")->required();
  train_flags.add_to(*train);

  // recall
  auto* recall = app.add_subcommand("recall", "noisy-cue retrieval trials on a saved model");
  std::string model_path;
  double noise = 0.1;
  long trials = 50;
  long max_steps = klrhop::kDefaultMaxSteps;
  recall->add_option("--model", model_path, "model JSON path")->required();
  recall->add_option("--noise", noise, "flip probability per neuron")->capture_default_str();
  recall->add_option("--trials", trials, "number of trials (trial t recalls pattern t mod P)")->capture_default_str();
  recall->add_option("--seed", seed, "noise seed")->capture_default_str();
  recall->add_option("--max-steps", max_steps, "synchronous update budget")->capture_default_str();
  recall->add_option("--out", out_path, "write the JSON summary here instead of stdout");

  // sharpness
  auto* sharpness = app.add_subcommand("sharpness", "force decomposition and sharpness at a stored pattern");
  Index pattern = 0;
  sharpness->add_option("--model", model_path, "model JSON path")->required();
  sharpness->add_option("--pattern", pattern, "stored pattern index")->capture_default_str();
  sharpness->add_option("--out", out_path, "write the JSON report here instead of stdout");

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "dual-matrix spectra, K_alpha eigenvalues and stable rank");
  spectrum->add_option("--model", model_path, "model JSON path")->required();
  spectrum->add_option("--out", out_path, "write the JSON report here instead of stdout");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "phase-grid sweep over (gamma, load); writes CSV");
  std::string grid_gamma = "0.00031622776601683794:1:8";
  std::string grid_load = "0.1:2.0:8";
  long cell_trials = 1;
  unsigned workers = 0;
  TrainFlags sweep_flags;
  sweep->add_option("--n", n, "number of neurons N")->capture_default_str();
  sweep->add_option("--grid-gamma", grid_gamma, "gamma axis lo:hi:steps (log-spaced) or a comma list")
      ->capture_default_str();
  sweep->add_option("--grid-load", grid_load, "load axis lo:hi:steps (linear) or a comma list")->capture_default_str();
  sweep->add_option("--trials", cell_trials, "trials averaged per cell")->capture_default_str();
  sweep->add_option("--seed", seed, "base seed")->capture_default_str();
  sweep->add_option("--workers", workers, "worker threads (0: $KLRHOP_WORKERS or hardware)")->capture_default_str();
  sweep->add_option("--out", out_path, "CSV output path")->required();
  sweep_flags.add_to(*sweep);

  // cross-section
  auto* cross = app.add_subcommand("cross-section", "force-growth profile over load at one gamma; writes CSV");
  double cross_gamma = 0.001;
  std::string cross_load = "0.25:2.0:8";
  TrainFlags cross_flags;
  cross->add_option("--n", n, "number of neurons N")->capture_default_str();
  cross->add_option("--gamma", cross_gamma, "RBF width gamma")->capture_default_str();
  cross->add_option("--grid-load", cross_load, "load axis lo:hi:steps (linear) or a comma list")->capture_default_str();
  cross->add_option("--trials", cell_trials, "trials averaged per cell")->capture_default_str();
  cross->add_option("--seed", seed, "base seed")->capture_default_str();
  cross->add_option("--workers", workers, "worker threads (0: $KLRHOP_WORKERS or hardware)")->capture_default_str();
  cross->add_option("--out", out_path, "CSV output path")->required();
  cross_flags.add_to(*cross);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitParameter;
  }

  try {
    if (train->parsed()) {
      const auto tc = train_flags.resolve();
      json config = {{"n", n}, {"p", p}, {"gamma", gamma}, {"seed", seed}, {"out", out_path}};
      config.update(train_config_json(tc));
      print_config("train", config);
      const klrhop::NetworkConfig net{n, p, gamma, seed};
      const auto model = klrhop::train_klr(klrhop::generate_patterns(net), gamma, tc, seed);
      klrhop::save_model(model, out_path);
      std::cout << json{{"epochs", model.train_meta.epochs},
                        {"final_loss", model.train_meta.final_loss},
                        {"converged", model.train_meta.converged},
                        {"out", out_path}}
                       .dump(2)
                << '\n';
    } else if (recall->parsed()) {
      print_config("recall", {{"model", model_path}, {"noise", noise}, {"trials", trials}, {"seed", seed},
                              {"max_steps", max_steps}});
      const auto model = klrhop::load_model(model_path);
      const auto s = klrhop::recall_experiment(model, noise, trials, seed, max_steps);
      emit({{"trials", s.trials},
            {"perfect", s.perfect},
            {"success_rate", s.success_rate()},
            {"fixed_points", s.fixed_points},
            {"two_cycles", s.two_cycles},
            {"mean_overlap", s.mean_overlap}},
           out_path);
    } else if (sharpness->parsed()) {
      print_config("sharpness", {{"model", model_path}, {"pattern", pattern}});
      const auto model = klrhop::load_model(model_path);
      const auto r = klrhop::force_report(model, model.patterns.pattern(pattern));
      emit({{"pattern", pattern},
            {"v", r.v_value},
            {"sharpness", r.sharpness},
            {"log10_sharpness", std::log10(r.sharpness)},
            {"fd_sq", r.fd_sq},
            {"fi_sq", r.fi_sq},
            {"rho", r.rho}},
           out_path);
    } else if (spectrum->parsed()) {
      print_config("spectrum", {{"model", model_path}});
      const auto model = klrhop::load_model(model_path);
      const auto r = klrhop::spectral_report(model);
      json result = {{"singular_values", vector_json(r.singular_values)},
                     {"alpha_eff_eigs", vector_json(r.alpha_eff_eigs)},
                     {"k_alpha_eigs", vector_json(r.k_alpha_eigs)},
                     {"lambda_max", r.lambda_max},
                     {"stable_rank", r.stable_rank},
                     {"spectrum_class", nullptr}};
      if (r.singular_values.size() >= 3) result["spectrum_class"] = to_string(klrhop::spectrum_shape_class(r));
      emit(result, out_path);
    } else if (sweep->parsed() || cross->parsed()) {
      const bool is_sweep = sweep->parsed();
      klrhop::GridSpec spec;
      spec.n_neurons = n;
      spec.base_seed = seed;
      spec.trials_per_cell = cell_trials;
      spec.train_config = (is_sweep ? sweep_flags : cross_flags).resolve();
      spec.gamma_values = is_sweep ? parse_axis(grid_gamma, true) : std::vector<double>{cross_gamma};
      spec.load_values = parse_axis(is_sweep ? grid_load : cross_load, false);
      spec.validate();
      const unsigned resolved_workers = workers == 0 ? klrhop::worker_count() : workers;
      json config = {{"n", n},
                     {"gamma_values", spec.gamma_values},
                     {"load_values", spec.load_values},
                     {"trials", cell_trials},
                     {"seed", seed},
                     {"workers", resolved_workers},
                     {"out", out_path}};
      config.update(train_config_json(spec.train_config));
      print_config(is_sweep ? "sweep" : "cross-section", config);
      const auto records =
          is_sweep ? klrhop::run_grid(spec, resolved_workers) : klrhop::cross_section(spec, resolved_workers);
      klrhop::write_records_csv(records, out_path);
      std::size_t failed = 0;
      for (const auto& r : records) failed += r.failed ? 1U : 0U;
      std::cout << "wrote " << records.size() << " records (" << failed << " failed) to " << out_path << '\n';
    }
  } catch (const klrhop::TrainingDivergedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const klrhop::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const klrhop::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParameter;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: invalid number: " << e.what() << '\n';
    return kExitParameter;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: number out of range: " << e.what() << '\n';
    return kExitParameter;
  }
  return 0;
}
