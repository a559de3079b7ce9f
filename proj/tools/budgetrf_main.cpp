// budgetrf: train, apply, and evaluate budget-aware random forests from CSV
// data, generate the bundled synthetic datasets, and verify the greedy
// max-cost bound against the exact oracle.
//
// Exit codes: 0 success, 2 usage error, 3 data or model error, 4 budget
// infeasible, 5 greedy bound violation. Human-readable logs go to standard
// error; machine output (CSV, model files) goes to --out targets or
// standard output.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "budgetrf/budgetrf.hpp"

namespace {

using namespace budgetrf;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInfeasible = 4;
constexpr int kExitBoundViolation = 5;

std::size_t default_threads() {
  if (const char* env = std::getenv("BUDGETRF_THREADS")) {
    std::size_t n = 0;
    if (detail::parse_index(env, n) && n >= 1) return n;
    std::cerr << "warning: ignoring BUDGETRF_THREADS='" << env << "'\n";
  }
  return 1;
}

/// Routes machine output to a file or to standard output when the path is
/// empty or "-".
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (path.empty() || path == "-") {
      stream_ = &std::cout;
      return;
    }
    file_.open(path);
    if (!file_) throw DataError(path + ": cannot open file for writing");
    path_ = path;
    stream_ = &file_;
  }

  std::ostream& stream() { return *stream_; }

  void finish() {
    stream_->flush();
    if (!*stream_) throw DataError((path_.empty() ? "<stdout>" : path_) + ": write failed");
  }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
  std::string path_;
};

/// A numeric CSV with no designated label column; every cell must parse.
struct RawMatrix {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> names;  // empty without a header
  std::size_t columns = 0;
};

RawMatrix load_raw_matrix(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  RawMatrix mat;
  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (detail::trim(view).empty()) continue;
    const auto fields = detail::split_fields(view);
    if (has_header && !saw_header) {
      saw_header = true;
      mat.columns = fields.size();
      for (auto f : fields) mat.names.emplace_back(detail::trim(f));
      continue;
    }
    if (mat.columns == 0) mat.columns = fields.size();
    if (fields.size() != mat.columns)
      throw DataError(path, line_no, "expected " + std::to_string(mat.columns) + " fields, got " +
                                         std::to_string(fields.size()));
    std::vector<double> row(mat.columns);
    for (std::size_t c = 0; c < mat.columns; ++c) {
      if (!detail::parse_double(fields[c], row[c]))
        throw DataError(path, line_no,
                        "field " + std::to_string(c + 1) + " is not numeric: '" +
                            std::string(detail::trim(fields[c])) + "'");
    }
    mat.rows.push_back(std::move(row));
  }
  if (mat.rows.empty()) throw DataError(path + ": no data rows");
  return mat;
}

/// Column selector: a string of digits is a zero-based index, anything else
/// a header name.
std::size_t resolve_column(const RawMatrix& mat, const std::string& selector,
                           const std::string& what, const std::string& path) {
  std::size_t index = 0;
  if (detail::parse_index(selector, index)) {
    if (index >= mat.columns)
      throw DataError(path + ": " + what + " index " + selector + " out of range for " +
                      std::to_string(mat.columns) + " columns");
    return index;
  }
  for (std::size_t c = 0; c < mat.names.size(); ++c) {
    if (mat.names[c] == selector) return c;
  }
  throw DataError(path + ": " + what + " '" + selector + "' not found in header");
}

struct CostFlags {
  std::string path;
  bool uniform = false;
};

CostVector resolve_costs(const CostFlags& flags, std::size_t m) {
  if (flags.uniform) return CostVector::uniform(m);
  return load_costs(flags.path, m);
}

struct ImpurityFlags {
  std::string kind = "pairs";
  Count alpha = 0;
  std::uint32_t power = 2;
};

ImpuritySpec resolve_impurity(const ImpurityFlags& flags) {
  if (flags.kind == "powers") return ImpuritySpec::powers(flags.power);
  return ImpuritySpec::threshold_pairs(flags.alpha);
}

void add_impurity_flags(CLI::App* cmd, ImpurityFlags& flags) {
  cmd->add_option("--impurity", flags.kind, "Impurity family: pairs or powers")
      ->check(CLI::IsMember({"pairs", "powers"}))
      ->capture_default_str();
  cmd->add_option("--alpha", flags.alpha, "threshold-Pairs alpha (pairs only)")
      ->capture_default_str();
  cmd->add_option("--power", flags.power, "Exponent for the powers family")
      ->check(CLI::Range(2u, 32u))
      ->capture_default_str();
}

void add_cost_flags(CLI::App* cmd, CostFlags& flags) {
  auto* group = cmd->add_option_group("costs", "Feature acquisition costs");
  group->add_option("--costs", flags.path, "Cost file: one positive number per feature");
  group->add_flag("--uniform-costs", flags.uniform, "Charge 1 per feature");
  group->require_option(1);
}

void print_grow_warning(const std::string& message) { std::cerr << "warning: " << message << "\n"; }

// ---------------------------------------------------------------- train --

struct TrainOpts {
  std::string data_path;
  std::string labels_col = "label";
  bool no_header = false;
  CostFlags costs;
  double budget = 0.0;
  ImpurityFlags impurity;
  std::size_t max_trees = 40;
  std::uint64_t seed = 0;
  std::string validation_path;
  double val_fraction = 0.2;
  std::size_t threads = 1;
  std::string out_path;
};

int run_train(const TrainOpts& o) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset all = load_csv(o.data_path, o.labels_col, !o.no_header);

  Dataset train;
  Dataset validation;
  if (!o.validation_path.empty()) {
    train = all;
    validation = load_csv(o.validation_path, o.labels_col, !o.no_header);
    if (validation.m != train.m)
      throw DataError(o.validation_path + ": has " + std::to_string(validation.m) +
                      " features but the training data has " + std::to_string(train.m));
  } else {
    SplitSpec split;
    split.train_fraction = 1.0 - o.val_fraction;
    split.validation_fraction = o.val_fraction;
    split.test_fraction = 0.0;
    Rng rng(derive_seed(o.seed, StreamTag::Split, 0));
    const SplitIndices idx = split_rows(all.n, split, rng);
    if (idx.train.empty() || idx.validation.empty())
      throw DataError(o.data_path + ": too few rows to hold out a validation part; pass --validation");
    train = subset(all, idx.train);
    validation = subset(all, idx.validation);
    std::cerr << "holding out " << validation.n << " of " << all.n << " rows for validation\n";
  }

  const CostVector costs = resolve_costs(o.costs, train.m);
  BudgetConfig config;
  config.budget = o.budget;
  config.max_trees = o.max_trees;
  config.seed = o.seed;
  config.threads = o.threads;
  config.warn = print_grow_warning;
  const ForestResult result =
      grow_forest(train, validation, config, resolve_impurity(o.impurity), costs);
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  if (result.status == ForestStatus::BudgetInfeasible) {
    std::cerr << "budget-infeasible: even one tree exceeds average validation cost "
              << detail::format_double(o.budget) << "\n";
    return kExitInfeasible;
  }

  Model model;
  model.forest = result.forest;
  model.label_values = all.label_values;
  model.feature_names = all.feature_names;
  save_model(model, o.out_path);
  std::cerr << "trained " << result.forest.size() << " trees; validation average cost "
            << detail::format_double(result.average_validation_cost) << " within budget "
            << detail::format_double(o.budget) << "; wall time " << wall_ms << " ms; model written to "
            << o.out_path << "\n";
  return 0;
}

// -------------------------------------------------------------- predict --

struct PredictOpts {
  std::string model_path;
  std::string data_path;
  std::string labels_col;  // optional; named column is dropped before prediction
  bool no_header = false;
  std::string out_path;
};

int run_predict(const PredictOpts& o) {
  const Model model = load_model(o.model_path);
  if (model.forest.empty()) throw ModelError(o.model_path + ": model has no trees");
  const std::size_t m = model.forest.costs.size();

  const RawMatrix mat = load_raw_matrix(o.data_path, !o.no_header);
  std::optional<std::size_t> label_col;
  if (!o.labels_col.empty()) label_col = resolve_column(mat, o.labels_col, "label column", o.data_path);
  const std::size_t features = mat.columns - (label_col ? 1 : 0);
  if (features != m)
    throw DataError(o.data_path + ": has " + std::to_string(features) +
                    " feature columns but the model expects " + std::to_string(m));

  OutputTarget out(o.out_path);
  out.stream() << "row,prediction\n";
  std::vector<double> example(m);
  for (std::size_t r = 0; r < mat.rows.size(); ++r) {
    std::size_t j = 0;
    for (std::size_t c = 0; c < mat.columns; ++c) {
      if (label_col && c == *label_col) continue;
      example[j++] = mat.rows[r][c];
    }
    const int label = predict(model.forest, example);
    const double value = static_cast<std::size_t>(label) < model.label_values.size()
                             ? model.label_values[static_cast<std::size_t>(label)]
                             : static_cast<double>(label);
    out.stream() << r << ',' << detail::format_double(value) << '\n';
  }
  out.finish();
  std::cerr << "predicted " << mat.rows.size() << " rows\n";
  return 0;
}

// ----------------------------------------------------------------- eval --

struct EvalOpts {
  std::string model_path;
  std::string data_path;
  std::string metric;
  std::string labels_col = "label";
  std::string query_col;
  bool no_header = false;
  std::string out_path;
};

double eval_ap5(const Model& model, const EvalOpts& o) {
  const RawMatrix mat = load_raw_matrix(o.data_path, !o.no_header);
  const std::size_t label_col = resolve_column(mat, o.labels_col, "label column", o.data_path);
  const std::size_t query_col = resolve_column(mat, o.query_col, "query column", o.data_path);
  if (label_col == query_col)
    throw DataError(o.data_path + ": label and query columns must differ");
  const std::size_t m = mat.columns - 2;
  if (m != model.forest.costs.size())
    throw DataError(o.data_path + ": has " + std::to_string(m) +
                    " feature columns but the model expects " +
                    std::to_string(model.forest.costs.size()));

  std::map<double, std::size_t> group_of;
  std::vector<QueryGroup> groups;
  std::vector<double> example(m);
  for (std::size_t r = 0; r < mat.rows.size(); ++r) {
    const double relevance = mat.rows[r][label_col];
    if (relevance != 0.0 && relevance != 1.0)
      throw DataError(o.data_path + ": ap5 needs 0/1 relevance labels, got " +
                      detail::format_double(relevance));
    std::size_t j = 0;
    for (std::size_t c = 0; c < mat.columns; ++c) {
      if (c == label_col || c == query_col) continue;
      example[j++] = mat.rows[r][c];
    }
    const double query = mat.rows[r][query_col];
    auto [it, inserted] = group_of.try_emplace(query, groups.size());
    if (inserted) {
      groups.emplace_back();
      groups.back().id = detail::format_double(query);
    }
    groups[it->second].documents.push_back(
        {r, relevance == 1.0 ? 1 : 0, confidence(model.forest, example)});
  }
  return average_precision_at_5(groups);
}

int run_eval(const EvalOpts& o) {
  const Model model = load_model(o.model_path);
  if (model.forest.empty()) throw ModelError(o.model_path + ": model has no trees");

  double value = 0.0;
  if (o.metric == "ap5") {
    if (o.query_col.empty()) throw DataError("--metric ap5 needs --query-col");
    value = eval_ap5(model, o);
  } else {
    const Dataset data = load_csv(o.data_path, o.labels_col, !o.no_header);
    if (data.m != model.forest.costs.size())
      throw DataError(o.data_path + ": has " + std::to_string(data.m) +
                      " features but the model expects " +
                      std::to_string(model.forest.costs.size()));
    if (o.metric == "error") {
      value = test_error(model.forest, data);
    } else if (o.metric == "cost") {
      value = average_cost(model.forest, data, model.forest.costs);
    } else {
      value = avg_feature_fraction(model.forest, data);
    }
  }

  OutputTarget out(o.out_path);
  out.stream() << "metric,value\n" << o.metric << ',' << detail::format_double(value) << '\n';
  out.finish();
  return 0;
}

// ---------------------------------------------------------------- sweep --

struct SweepOpts {
  std::string data_path;
  std::string labels_col = "label";
  bool no_header = false;
  std::string validation_path;
  std::string test_path;
  CostFlags costs;
  std::vector<Count> alphas;
  std::vector<double> budgets;
  std::size_t repeats = 1;
  double budget = std::numeric_limits<double>::infinity();
  std::size_t max_trees = 40;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out_path;
};

int run_sweep(const SweepOpts& o) {
  Dataset train;
  Dataset validation;
  Dataset test;
  if (!o.validation_path.empty()) {
    train = load_csv(o.data_path, o.labels_col, !o.no_header);
    validation = load_csv(o.validation_path, o.labels_col, !o.no_header);
    test = load_csv(o.test_path, o.labels_col, !o.no_header);
    if (validation.m != train.m || test.m != train.m)
      throw DataError("validation and test files must have the same features as --data");
  } else {
    const Dataset all = load_csv(o.data_path, o.labels_col, !o.no_header);
    Rng rng(derive_seed(o.seed, StreamTag::Split, 0));
    const SplitIndices idx = split_rows(all.n, SplitSpec{}, rng);
    if (idx.train.empty() || idx.validation.empty() || idx.test.empty())
      throw DataError(o.data_path + ": too few rows for a train/validation/test split");
    train = subset(all, idx.train);
    validation = subset(all, idx.validation);
    test = subset(all, idx.test);
    std::cerr << "split " << all.n << " rows into " << train.n << "/" << validation.n << "/"
              << test.n << " train/validation/test\n";
  }

  const CostVector costs = resolve_costs(o.costs, train.m);
  SweepOptions options;
  if (!o.alphas.empty()) options.alphas = o.alphas;
  options.repeats = o.repeats;
  options.budgets = o.budgets;
  options.config.budget = o.budget;
  options.config.max_trees = o.max_trees;
  options.config.seed = o.seed;
  options.config.threads = o.threads;
  options.config.warn = print_grow_warning;
  const SweepResult result = sweep_alpha(train, validation, test, options, costs);

  OutputTarget out(o.out_path);
  write_curve_csv(out.stream(), result.points);
  out.finish();

  for (Count alpha : result.infeasible_alphas)
    std::cerr << "alpha " << alpha << ": budget-infeasible, no curve points\n";
  for (const AlphaRecommendation& rec : result.recommendations) {
    std::cerr << "budget " << detail::format_double(rec.budget) << ": alpha " << rec.alpha
              << " with " << rec.trees << " trees (validation error "
              << detail::format_double(rec.validation_error) << ", cost "
              << detail::format_double(rec.validation_cost) << ")\n";
  }
  for (double budget : o.budgets) {
    const bool found = std::any_of(result.recommendations.begin(), result.recommendations.end(),
                                   [&](const AlphaRecommendation& r) { return r.budget == budget; });
    if (!found)
      std::cerr << "budget " << detail::format_double(budget) << ": no feasible configuration\n";
  }

  if (result.points.empty() && !result.infeasible_alphas.empty()) {
    std::cerr << "budget-infeasible: every alpha exceeded the training budget\n";
    return kExitInfeasible;
  }
  return 0;
}

// ------------------------------------------------------------------ gen --

struct GenOpts {
  std::string dataset;
  std::string out_prefix;
  std::uint64_t seed = 0;
};

void save_cost_file(const CostVector& costs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open file for writing");
  for (double c : costs.values) out << detail::format_double(c) << '\n';
  if (!out) throw DataError(path + ": write failed");
}

int run_gen(const GenOpts& o) {
  Dataset data;
  CostVector costs;
  if (o.dataset == "figure1") {
    Figure1Toy toy = gen_figure1_toy();
    data = std::move(toy.data);
    costs = std::move(toy.costs);
  } else if (o.dataset == "synth1024") {
    data = gen_synthetic_1024();
    costs = CostVector::uniform(data.m);
  } else {
    RedundantSynthetic synthetic = gen_redundant_cost_synthetic(o.seed);
    data = std::move(synthetic.data);
    costs = std::move(synthetic.costs);
  }
  const std::string data_path = o.out_prefix + "_data.csv";
  const std::string cost_path = o.out_prefix + "_costs.txt";
  save_csv(data, data_path);
  save_cost_file(costs, cost_path);
  std::cerr << "wrote " << data.n << " rows x " << data.m << " features to " << data_path
            << " and costs to " << cost_path << "\n";
  return 0;
}

// --------------------------------------------------------- oracle-check --

struct OracleCheckOpts {
  std::size_t instances = 500;
  std::uint64_t seed = 0;
  std::size_t max_features = 4;
  std::size_t max_examples = 32;
  std::string out_path;
};

int run_oracle_check(const OracleCheckOpts& o) {
  RandomInstanceOptions options;
  options.max_features = o.max_features;
  options.max_examples = o.max_examples;

  OutputTarget out(o.out_path);
  out.stream() << "instance,greedy,opt,ratio,bound\n";
  std::size_t violations = 0;
  double worst_ratio = 1.0;
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng(derive_seed(o.seed, StreamTag::Instance, i));
    const SmallInstance instance = random_small_instance(rng, options);

    GrowConfig config;
    config.spec = instance.spec;
    config.search = SplitSearch::Exhaustive;
    Rng grow_rng(0);  // unused by the exhaustive search
    const GrowResult grown = grow(instance.data, instance.costs, config, grow_rng);
    const double greedy = max_cost(grown.tree, instance.data, instance.costs);
    const double opt = opt_max_cost(instance);

    const ImpurityValue root =
        impurity(instance.spec, class_counts(instance.data, all_rows(instance.data)));
    // Pure instances cost nothing either way; their ratio is 1 by convention.
    const double ratio = root == 0 ? 1.0 : greedy / opt;
    const double bound = root == 0 ? 0.0 : (std::log(static_cast<double>(root)) + 1.0) * opt;
    const bool violated = root != 0 && greedy > bound;
    if (violated) {
      ++violations;
      std::cerr << "instance " << i << ": greedy " << detail::format_double(greedy)
                << " exceeds bound " << detail::format_double(bound) << "\n";
    }
    worst_ratio = std::max(worst_ratio, ratio);
    out.stream() << i << ',' << detail::format_double(greedy) << ',' << detail::format_double(opt)
                 << ',' << detail::format_double(ratio) << ',' << detail::format_double(bound)
                 << '\n';
  }
  out.finish();
  std::cerr << "checked " << o.instances << " instances; " << violations
            << " bound violations; worst greedy/opt ratio " << detail::format_double(worst_ratio)
            << "\n";
  return violations == 0 ? 0 : kExitBoundViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budget-aware random forests over CSV data"};
  app.require_subcommand(1);
  const std::size_t threads_default = default_threads();

  TrainOpts train_opts;
  train_opts.threads = threads_default;
  CLI::App* train_cmd = app.add_subcommand("train", "Grow a forest under an average-cost budget");
  train_cmd->add_option("--data", train_opts.data_path, "Training CSV")->required();
  train_cmd->add_option("--labels-col", train_opts.labels_col, "Label column name or index")
      ->capture_default_str();
  train_cmd->add_flag("--no-header", train_opts.no_header, "CSV has no header row");
  add_cost_flags(train_cmd, train_opts.costs);
  train_cmd->add_option("--budget", train_opts.budget, "Average validation cost cap per example")
      ->check(CLI::NonNegativeNumber)
      ->required();
  add_impurity_flags(train_cmd, train_opts.impurity);
  train_cmd->add_option("--max-trees", train_opts.max_trees, "Tree cap")->capture_default_str();
  train_cmd->add_option("--seed", train_opts.seed, "Master seed")->capture_default_str();
  train_cmd->add_option("--validation", train_opts.validation_path,
                        "Validation CSV (default: hold out --val-fraction of --data)");
  train_cmd->add_option("--val-fraction", train_opts.val_fraction,
                        "Held-out fraction when no --validation file is given")
      ->check(CLI::Range(0.01, 0.99))
      ->capture_default_str();
  train_cmd->add_option("--threads", train_opts.threads, "Parallel tree growth (BUDGETRF_THREADS)")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--out", train_opts.out_path, "Model file to write")->required();

  PredictOpts predict_opts;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Label new rows with a trained model");
  predict_cmd->add_option("--model", predict_opts.model_path, "Model file")->required();
  predict_cmd->add_option("--data", predict_opts.data_path, "Feature CSV")->required();
  predict_cmd->add_option("--labels-col", predict_opts.labels_col,
                          "Column to drop before prediction (for labeled files)");
  predict_cmd->add_flag("--no-header", predict_opts.no_header, "CSV has no header row");
  predict_cmd->add_option("--out", predict_opts.out_path, "Prediction CSV (default: stdout)");

  EvalOpts eval_opts;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score a trained model on labeled data");
  eval_cmd->add_option("--model", eval_opts.model_path, "Model file")->required();
  eval_cmd->add_option("--data", eval_opts.data_path, "Labeled CSV")->required();
  eval_cmd->add_option("--metric", eval_opts.metric, "error, ap5, cost, or fraction")
      ->check(CLI::IsMember({"error", "ap5", "cost", "fraction"}))
      ->required();
  eval_cmd->add_option("--labels-col", eval_opts.labels_col, "Label column name or index")
      ->capture_default_str();
  eval_cmd->add_option("--query-col", eval_opts.query_col, "Query id column (ap5 only)");
  eval_cmd->add_flag("--no-header", eval_opts.no_header, "CSV has no header row");
  eval_cmd->add_option("--out", eval_opts.out_path, "Metric CSV (default: stdout)");

  SweepOpts sweep_opts;
  sweep_opts.threads = threads_default;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "Trace accuracy-cost curves over an alpha grid");
  sweep_cmd->add_option("--data", sweep_opts.data_path, "CSV to split, or the training part")
      ->required();
  sweep_cmd->add_option("--labels-col", sweep_opts.labels_col, "Label column name or index")
      ->capture_default_str();
  sweep_cmd->add_flag("--no-header", sweep_opts.no_header, "CSV has no header row");
  auto* sweep_val = sweep_cmd->add_option("--validation", sweep_opts.validation_path,
                                          "Validation CSV (with --test; default: split --data)");
  auto* sweep_test = sweep_cmd->add_option("--test", sweep_opts.test_path, "Test CSV");
  sweep_val->needs(sweep_test);
  sweep_test->needs(sweep_val);
  add_cost_flags(sweep_cmd, sweep_opts.costs);
  sweep_cmd->add_option("--alphas", sweep_opts.alphas,
                        "threshold-Pairs alphas (default: 0,2,4,6,8,10,15,25,35,45)")
      ->delimiter(',');
  sweep_cmd->add_option("--budgets", sweep_opts.budgets,
                        "Budget levels to recommend an alpha for")
      ->delimiter(',');
  sweep_cmd->add_option("--repeats", sweep_opts.repeats, "Runs per alpha, for mean and stddev")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep_cmd->add_option("--budget", sweep_opts.budget, "Training budget (default: unbounded)")
      ->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--max-trees", sweep_opts.max_trees, "Trees per forest")
      ->capture_default_str();
  sweep_cmd->add_option("--seed", sweep_opts.seed, "Master seed")->capture_default_str();
  sweep_cmd->add_option("--threads", sweep_opts.threads, "Parallel tree growth (BUDGETRF_THREADS)")
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--out", sweep_opts.out_path, "Curve CSV (default: stdout)");

  GenOpts gen_opts;
  CLI::App* gen_cmd = app.add_subcommand("gen", "Write a bundled synthetic dataset");
  gen_cmd->add_option("--dataset", gen_opts.dataset, "figure1, synth1024, or redundant")
      ->check(CLI::IsMember({"figure1", "synth1024", "redundant"}))
      ->required();
  gen_cmd->add_option("--out-prefix", gen_opts.out_prefix, "Writes <prefix>_data.csv and <prefix>_costs.txt")
      ->required();
  gen_cmd->add_option("--seed", gen_opts.seed, "Seed for the redundant generator")
      ->capture_default_str();

  OracleCheckOpts oracle_opts;
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle-check", "Compare greedy max-cost against the exact oracle");
  oracle_cmd->add_option("--instances", oracle_opts.instances, "Random instances to draw")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  oracle_cmd->add_option("--seed", oracle_opts.seed, "Master seed")->capture_default_str();
  oracle_cmd
      ->add_option("--max-features", oracle_opts.max_features,
                   "Features per instance (search cost grows steeply)")
      ->check(CLI::Range(std::size_t{1}, SmallInstance::kMaxFeatures))
      ->capture_default_str();
  oracle_cmd->add_option("--max-examples", oracle_opts.max_examples, "Examples per instance")
      ->check(CLI::Range(std::size_t{2}, SmallInstance::kMaxExamples))
      ->capture_default_str();
  oracle_cmd->add_option("--out", oracle_opts.out_path, "Per-instance CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(train_cmd)) return run_train(train_opts);
    if (app.got_subcommand(predict_cmd)) return run_predict(predict_opts);
    if (app.got_subcommand(eval_cmd)) return run_eval(eval_opts);
    if (app.got_subcommand(sweep_cmd)) return run_sweep(sweep_opts);
    if (app.got_subcommand(gen_cmd)) return run_gen(gen_opts);
    if (app.got_subcommand(oracle_cmd)) return run_oracle_check(oracle_opts);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
