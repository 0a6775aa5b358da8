#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netcv/netcv.hpp"

namespace fs = std::filesystem;
using namespace netcv;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint64_t parse_seed(const std::string& text, const char* source) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string(source) + ": not an unsigned integer seed: '" + text + "'");
  }
}

// --seed, then NCV_SEED, then a fresh random seed (reported in the output).
std::uint64_t resolve_seed(const std::optional<std::string>& flag) {
  if (flag) return parse_seed(*flag, "--seed");
  if (const char* env = std::getenv("NCV_SEED"); env && *env) return parse_seed(env, "NCV_SEED");
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "using generated seed " << seed << '\n';
  return seed;
}

std::vector<ModelType> parse_models(const std::vector<std::string>& names) {
  std::vector<ModelType> out;
  for (const auto& name : names) out.push_back(parse_model_type(name));
  if (out.empty()) throw UsageError("--models needs at least one of sbm, dcbm");
  return out;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void print_report(const NcvReport& r, std::ostream& os) {
  os << "seed " << r.seed << ", V=" << r.V << ", loss " << to_string(r.loss) << '\n';
  os << "  model  K         total\n";
  for (const auto& c : r.candidates) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "  %-5s %2d %13.4f%s\n", std::string(to_string(c.candidate.model)).c_str(),
                  c.candidate.K, c.total, c.candidate == r.selected ? "  <- selected" : "");
    os << buf;
  }
}

void print_table(const SuccessTable& t, std::ostream& os) {
  std::ostringstream csv;
  write_csv(csv, t);
  os << csv.str();
}

struct CommonRun {
  std::optional<std::string> seed;
  std::size_t folds = 3;
  std::string loss = "nll";
  unsigned threads = default_threads();
  std::string output;
};

void add_common(CLI::App* cmd, CommonRun& c) {
  cmd->add_option("--seed", c.seed, "master seed (default: $NCV_SEED, else generated)");
  cmd->add_option("--folds,-V", c.folds, "number of folds V")->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  cmd->add_option("--loss", c.loss, "validation loss: l2 or nll")->check(CLI::IsMember({"l2", "nll"}));
  cmd->add_option("--threads", c.threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--output,-o", c.output, "output file (default: stdout)");
}

// select ---------------------------------------------------------------------

struct SelectArgs {
  CommonRun run;
  std::string input;
  int kmax = 6;
  std::vector<std::string> models{"sbm", "dcbm"};
  std::size_t reps = 1;
  bool lcc = false;
  bool directed = false;
};

int cmd_select(const SelectArgs& a) {
  const std::uint64_t seed = resolve_seed(a.run.seed);
  LabeledGraph g = load_graph_file(a.input, !a.directed);
  AdjacencyMatrix adj = std::move(g.adjacency);
  if (a.lcc) adj = largest_connected_component(adj).adjacency;
  const auto candidates = candidate_grid(parse_models(a.models), a.kmax);
  if (adj.n() < 2 * a.run.folds) throw UsageError("graph has too few nodes for the requested folds");

  NcvOptions opt;
  opt.folds = a.run.folds;
  opt.loss = parse_loss_kind(a.run.loss);
  opt.threads = a.run.threads;

  if (a.reps == 1) {
    const auto report = ncv_select(adj, candidates, opt, seed);
    print_report(report, std::cerr);
    Json j = report_json(report);
    emit(dump(j), a.run.output);
    return 0;
  }
  const auto freq = repeat_ncv(adj, candidates, opt, a.reps, seed);
  Json j = frequency_json(freq);
  j["V"] = opt.folds;
  j["loss"] = to_string(opt.loss);
  Json reports = Json::array();
  for (const auto& r : freq.reports) reports.push_back(report_json(r));
  j["reports"] = std::move(reports);
  for (const auto& [c, count] : freq.counts) std::cerr << to_string(c) << ": " << count << "/" << a.reps << '\n';
  emit(dump(j), a.run.output);
  return 0;
}

// simulate -------------------------------------------------------------------

struct SimulateArgs {
  std::string model = "sbm";
  std::size_t n = 0;
  int k = 0;
  std::optional<double> b_diag, b_off;
  std::optional<std::string> seed;
  std::string psi_file;
  std::string params_file;
  std::string output = "graph";
};

std::vector<double> read_numbers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::vector<double> out;
  for (double x; in >> x;) out.push_back(x);
  if (!in.eof()) throw UsageError("'" + path + "' must hold whitespace-separated numbers");
  return out;
}

ModelParams simulate_params(const SimulateArgs& a, Rng& rng) {
  const ModelType model = parse_model_type(a.model);
  if (!a.params_file.empty()) {
    std::ifstream in(a.params_file);
    if (!in) throw UsageError("cannot read '" + a.params_file + "'");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw UsageError("bad params JSON: " + std::string(e.what()));
    }
    ModelParams p = params_from_json(j);
    if (model_type_of(p) != model) throw UsageError("params file describes a different model type");
    return p;
  }
  if (a.n == 0 || a.k < 1) throw UsageError("need --n and --k (or --params)");
  if (static_cast<std::size_t>(a.k) > a.n) throw UsageError("--k exceeds --n");
  if (!a.b_diag || !a.b_off) throw UsageError("need --b-diag and --b-off (or --params)");
  const std::size_t base = a.n / static_cast<std::size_t>(a.k);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(a.k), base);
  sizes.back() += a.n % static_cast<std::size_t>(a.k);
  Membership g = block_membership(sizes);
  BlockMatrix b = BlockMatrix::planted(a.k, *a.b_diag, *a.b_off);
  if (model == ModelType::sbm) {
    if (!a.psi_file.empty()) throw UsageError("--psi only applies to dcbm");
    return SbmParams(std::move(g), std::move(b));
  }
  std::vector<double> raw;
  if (!a.psi_file.empty()) {
    raw = read_numbers(a.psi_file);
    if (raw.size() != a.n) throw UsageError("--psi file must hold exactly n values");
  } else {
    raw.resize(a.n);
    for (auto& x : raw) x = rng.uniform(0.2, 1.0);
  }
  DegreeParams psi = DegreeParams::normalized(std::move(raw), g);
  return DcbmParams(std::move(g), std::move(b), std::move(psi));
}

int cmd_simulate(const SimulateArgs& a) {
  const std::uint64_t seed = resolve_seed(a.seed);
  Rng rng(seed);
  const ModelParams params = simulate_params(a, rng);
  Rng graph_rng(derive_seed(seed, {0}));
  const AdjacencyMatrix adj = sample(params, graph_rng);

  const fs::path prefix(a.output);
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  const std::string edges = a.output + ".edges.txt";
  const std::string labels = a.output + ".labels.txt";
  const std::string meta = a.output + ".params.json";
  write_edge_list(edges, adj);
  {
    std::ofstream out(labels);
    if (!out) throw Error("cannot write '" + labels + "'");
    const Membership& g = membership_of(params);
    for (std::size_t i = 0; i < g.n(); ++i) out << i << ' ' << g[i] + 1 << '\n';
  }
  Json j = params_json(params);
  j["n"] = adj.n();
  j["seed"] = seed;
  j["edges"] = adj.edge_count();
  emit(dump(j), meta);
  std::cerr << "wrote " << edges << " (" << adj.n() << " nodes, " << adj.edge_count() << " edges), " << labels
            << ", " << meta << '\n';
  return 0;
}

// bench ----------------------------------------------------------------------

struct BenchArgs {
  CommonRun run;
  std::string which;
  std::vector<std::size_t> n, n1;
  std::vector<int> k;
  std::vector<double> r;
  std::vector<std::string> models;
  std::size_t reps = 20;
  int extra_k = 2;
  std::string json;
  std::string input;
  std::string curve;
  int kmax = 6;
};

int cmd_bench(const BenchArgs& a) {
  const Experiment which = [&] {
    try {
      return parse_experiment(a.which);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }();
  const std::uint64_t seed = resolve_seed(a.run.seed);

  if (which == Experiment::polblogs) {
    if (a.input.empty()) throw UsageError(std::string("bench polblogs needs --input; ") + std::string(polblogs_hint));
    NcvOptions opt;
    opt.folds = a.run.folds;
    opt.loss = parse_loss_kind(a.run.loss);
    opt.threads = a.run.threads;
    const auto res = run_polblogs(a.input, a.reps, opt, seed, a.kmax);
    std::ostringstream csv;
    write_frequency_csv(csv, res.selections);
    emit(csv.str(), a.run.output);
    if (!a.curve.empty()) {
      std::ostringstream curve;
      write_loss_curve_csv(curve, res.loss_curve);
      emit(curve.str(), a.curve);
    }
    if (!a.json.empty()) {
      Json j = frequency_json(res.selections);
      j["nodes_in_file"] = res.nodes_in_file;
      j["nodes_in_component"] = res.nodes_in_component;
      j["V"] = opt.folds;
      j["loss"] = to_string(opt.loss);
      j["first_split"] = report_json(res.selections.reports.front());
      emit(dump(j), a.json);
    }
    const auto modal = res.selections.modal();
    std::cerr << "nodes in file " << res.nodes_in_file << ", largest component " << res.nodes_in_component
              << ", modal selection " << to_string(modal) << " (" << res.selections.counts.at(modal) << "/"
              << a.reps << ")\n";
    return 0;
  }

  ExperimentSpec spec;
  spec.which = which;
  spec.n = a.n;
  spec.K = a.k;
  spec.n1 = a.n1;
  spec.r = a.r;
  spec.models = a.models.empty() ? std::vector<ModelType>{} : parse_models(a.models);
  spec.reps = a.reps;
  spec.folds = a.run.folds;
  spec.loss = parse_loss_kind(a.run.loss);
  spec.seed = seed;
  spec.extra_k = a.extra_k;
  spec.threads = a.run.threads;

  SuccessTable table;
  switch (which) {
    case Experiment::sim1: table = run_sim1(spec); break;
    case Experiment::sim2: table = run_sim2(spec); break;
    case Experiment::sim3: table = run_sim3(spec); break;
    case Experiment::polblogs: break;
  }
  std::ostringstream csv;
  write_csv(csv, table);
  emit(csv.str(), a.run.output);
  if (!a.json.empty()) emit(dump(table_json(table)), a.json);
  if (!a.run.output.empty() && a.run.output != "-") print_table(table, std::cerr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"V-fold network cross-validation for block models"};
  app.require_subcommand(1);

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "choose K and the model type for an observed graph");
  select->add_option("--input,-i", sel.input, "edge list or .gml file")->required()->check(CLI::ExistingFile);
  select->add_option("--kmax", sel.kmax, "largest K to score")->check(CLI::PositiveNumber);
  select->add_option("--models", sel.models, "comma-separated subset of sbm,dcbm")->delimiter(',');
  select->add_option("--reps", sel.reps, "independent splits; above 1 reports selection frequencies")
      ->check(CLI::PositiveNumber);
  select->add_flag("--lcc", sel.lcc, "restrict to the largest connected component");
  select->add_flag("--directed", sel.directed, "keep only reciprocated pairs instead of symmetrizing");
  add_common(select, sel.run);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "sample a block-model graph with ground-truth labels");
  simulate->add_option("model", sim.model, "sbm or dcbm")->required()->check(CLI::IsMember({"sbm", "dcbm"}));
  simulate->add_option("--n", sim.n, "node count");
  simulate->add_option("--k", sim.k, "community count (balanced sizes)");
  simulate->add_option("--b-diag", sim.b_diag, "within-community probability");
  simulate->add_option("--b-off", sim.b_off, "between-community probability");
  simulate->add_option("--psi", sim.psi_file, "dcbm activeness values, one per node (normalized per block)");
  simulate->add_option("--params", sim.params_file, "JSON params {B, labels[, psi]} instead of the flags");
  simulate->add_option("--seed", sim.seed, "seed (default: $NCV_SEED, else generated)");
  simulate->add_option("--output,-o", sim.output, "output prefix");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "reproduce a simulation or the political blogs analysis");
  bench_cmd->add_option("experiment", bench.which, "sim1, sim2, sim3 or polblogs")->required();
  bench_cmd->add_option("--n", bench.n, "node counts")->delimiter(',');
  bench_cmd->add_option("--k", bench.k, "true community counts")->delimiter(',');
  bench_cmd->add_option("--n1", bench.n1, "sim1 smallest-community sizes (0 = balanced)")->delimiter(',');
  bench_cmd->add_option("--r", bench.r, "sim1 sparsity levels")->delimiter(',');
  bench_cmd->add_option("--models", bench.models, "sim3 true model types")->delimiter(',');
  bench_cmd->add_option("--reps", bench.reps, "replications per grid point")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--extra-k", bench.extra_k, "candidates run up to K + extra-k")
      ->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--json", bench.json, "also write the table as JSON");
  bench_cmd->add_option("--input,-i", bench.input, "polblogs edge list or .gml");
  bench_cmd->add_option("--curve", bench.curve, "polblogs loss curve CSV (model,K,total_loss)");
  bench_cmd->add_option("--kmax", bench.kmax, "polblogs largest K")->check(CLI::PositiveNumber);
  add_common(bench_cmd, bench.run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*select) return cmd_select(sel);
    if (*simulate) return cmd_simulate(sim);
    if (*bench_cmd) return cmd_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
