#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "netcv/block_models.hpp"
#include "netcv/edge_list.hpp"
#include "netcv/json_io.hpp"
#include "netcv/ncv.hpp"
#include "netcv/parallel.hpp"

namespace netcv {

enum class Experiment { sim1, sim2, sim3, polblogs };

inline std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::sim1: return "sim1";
    case Experiment::sim2: return "sim2";
    case Experiment::sim3: return "sim3";
    case Experiment::polblogs: return "polblogs";
  }
  return "?";
}

inline Experiment parse_experiment(std::string_view s) {
  if (s == "sim1") return Experiment::sim1;
  if (s == "sim2") return Experiment::sim2;
  if (s == "sim3") return Experiment::sim3;
  if (s == "polblogs") return Experiment::polblogs;
  throw Error("unknown experiment '" + std::string(s) + "'");
}

/// Grid and run settings for one experiment. Empty lists take the published
/// design for that experiment (see with_defaults).
struct ExperimentSpec {
  Experiment which = Experiment::sim1;
  std::vector<std::size_t> n;
  std::vector<int> K;
  std::vector<std::size_t> n1;  // sim1 only; 0 means balanced (n / K)
  std::vector<double> r;        // sim1 only
  std::vector<ModelType> models;  // sim3 only
  std::size_t reps = 20;
  std::size_t folds = 3;
  LossKind loss = LossKind::negloglik;
  std::uint64_t seed = 0;
  int extra_k = 2;  // candidates K~ in {1, ..., K + extra_k}
  unsigned threads = 1;
  ClusterOptions cluster{};
};

inline ExperimentSpec with_defaults(ExperimentSpec s) {
  switch (s.which) {
    case Experiment::sim1:
      if (s.n.empty()) s.n = {1000};
      if (s.K.empty()) s.K = {2, 3, 4};
      if (s.n1.empty()) s.n1 = {100, 200, 0};
      if (s.r.empty()) s.r = {0.01, 0.02, 0.05, 0.1, 0.2};
      break;
    case Experiment::sim2:
      if (s.n.empty()) s.n = {600, 1200};
      if (s.K.empty()) s.K = {1, 2, 3, 4};
      break;
    case Experiment::sim3:
      if (s.n.empty()) s.n = {300, 600, 1200};
      if (s.K.empty()) s.K = {1, 2, 3, 4};
      if (s.models.empty()) s.models = {ModelType::sbm, ModelType::dcbm};
      break;
    case Experiment::polblogs:
      break;
  }
  return s;
}

/// Outcome counts for one grid point.
struct SuccessRow {
  std::string experiment;
  std::size_t n = 0;
  int K = 0;
  std::size_t n1 = 0;  // 0 when not applicable
  double r = std::numeric_limits<double>::quiet_NaN();
  ModelType model = ModelType::sbm;
  std::size_t reps = 0;
  std::size_t correct_k = 0;     // K^ = K
  std::size_t under_k = 0;       // K^ < K
  std::size_t correct_type = 0;  // T^ = T
  std::size_t correct_both = 0;  // T^ = T and K^ = K
  std::uint64_t seed = 0;
  bool joint = false;  // model type was selected too

  double success_rate() const { return ratio(joint ? correct_both : correct_k, reps); }
  double under_rate() const { return ratio(under_k, reps); }
  double type_rate() const { return ratio(correct_type, reps); }
  double k_given_type_rate() const { return ratio(correct_both, correct_type); }

  static double ratio(std::size_t a, std::size_t b) {
    return b == 0 ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(a) / static_cast<double>(b);
  }
};

struct SuccessTable {
  std::vector<SuccessRow> rows;
  std::size_t folds = 3;
  LossKind loss = LossKind::negloglik;
  int extra_k = 2;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string format_number(double x) {
  if (std::isnan(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline Json number_or_null(double x) { return std::isnan(x) ? Json(nullptr) : Json(x); }

inline std::uint64_t cell_seed(std::uint64_t seed, Experiment e, std::size_t n, int k, std::size_t n1, double r,
                               ModelType m) {
  return derive_seed(seed, {static_cast<std::uint64_t>(e), n, static_cast<std::uint64_t>(k), n1,
                            std::isnan(r) ? 0 : std::bit_cast<std::uint64_t>(r), static_cast<std::uint64_t>(m)});
}

struct Cell {
  SuccessRow row;
  std::vector<Candidate> candidates;
};

struct Outcome {
  Candidate selected;
};

// Runs every (cell, rep) job; draw(cell, rng) samples the graph and returns
// its true parameters.
template <class Draw>
SuccessTable run_cells(std::vector<Cell> cells, const ExperimentSpec& spec, Draw draw) {
  if (spec.reps < 1) throw Error("experiment: reps must be at least 1");
  const std::size_t jobs = cells.size() * spec.reps;
  std::vector<Outcome> outcomes(jobs);
  NcvOptions opt{spec.folds, spec.loss, 1, spec.cluster};
  parallel_for(jobs, spec.threads, [&](std::size_t job) {
    const Cell& cell = cells[job / spec.reps];
    const std::size_t rep = job % spec.reps;
    const std::uint64_t rs = rep_seed(cell.row.seed, rep);
    Rng graph_rng(derive_seed(rs, {0}));
    const ModelParams params = draw(cell.row, graph_rng);
    const AdjacencyMatrix a = sample(params, graph_rng);
    outcomes[job].selected = ncv_select(a, cell.candidates, opt, derive_seed(rs, {1})).selected;
  });

  SuccessTable table{{}, spec.folds, spec.loss, spec.extra_k, spec.seed};
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SuccessRow row = cells[c].row;
    row.reps = spec.reps;
    for (std::size_t rep = 0; rep < spec.reps; ++rep) {
      const Candidate& s = outcomes[c * spec.reps + rep].selected;
      const bool type_ok = s.model == row.model;
      row.correct_k += s.K == row.K;
      row.under_k += s.K < row.K;
      row.correct_type += type_ok;
      row.correct_both += type_ok && s.K == row.K;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline std::vector<Candidate> sbm_candidates(int k, int extra) { return candidate_grid({ModelType::sbm}, k + extra); }

}  // namespace detail

/// Sparsity and imbalance: B = r * B0 over the (r, K, n1) grid, SBM
/// candidates K~ = 1..K+extra_k.
inline SuccessTable run_sim1(ExperimentSpec spec) {
  spec.which = Experiment::sim1;
  spec = with_defaults(std::move(spec));
  std::vector<detail::Cell> cells;
  for (std::size_t n : spec.n) {
    for (double r : spec.r) {
      for (int k : spec.K) {
        for (std::size_t n1_flag : spec.n1) {
          const std::size_t n1 = n1_flag == 0 ? n / static_cast<std::size_t>(k) : n1_flag;
          sim1_params(n, k, n1, r);  // validate up front
          SuccessRow row;
          row.experiment = "sim1";
          row.n = n;
          row.K = k;
          row.n1 = n1;
          row.r = r;
          row.seed = detail::cell_seed(spec.seed, Experiment::sim1, n, k, n1, r, ModelType::sbm);
          cells.push_back({std::move(row), detail::sbm_candidates(k, spec.extra_k)});
        }
      }
    }
  }
  return detail::run_cells(std::move(cells), spec, [](const SuccessRow& row, Rng&) -> ModelParams {
    return sim1_params(row.n, row.K, row.n1, row.r);
  });
}

/// Random block matrices filtered on their K-th singular value; NCV only.
inline SuccessTable run_sim2(ExperimentSpec spec) {
  spec.which = Experiment::sim2;
  spec = with_defaults(std::move(spec));
  std::vector<detail::Cell> cells;
  for (std::size_t n : spec.n) {
    for (int k : spec.K) {
      if (k < 1) throw Error("sim2: K must be at least 1");
      sim2_design(k);
      SuccessRow row;
      row.experiment = "sim2";
      row.n = n;
      row.K = k;
      row.seed = detail::cell_seed(spec.seed, Experiment::sim2, n, k, 0, std::nan(""), ModelType::sbm);
      cells.push_back({std::move(row), detail::sbm_candidates(k, spec.extra_k)});
    }
  }
  return detail::run_cells(std::move(cells), spec,
                           [](const SuccessRow& row, Rng& rng) -> ModelParams { return sim2_params(row.n, row.K, rng); });
}

/// Joint model-type and K selection over {SBM, DCBM} x {1..K+extra_k}.
inline SuccessTable run_sim3(ExperimentSpec spec) {
  spec.which = Experiment::sim3;
  spec = with_defaults(std::move(spec));
  std::vector<detail::Cell> cells;
  for (std::size_t n : spec.n) {
    for (ModelType m : spec.models) {
      for (int k : spec.K) {
        if (k < 1) throw Error("sim3: K must be at least 1");
        SuccessRow row;
        row.experiment = "sim3";
        row.n = n;
        row.K = k;
        row.model = m;
        row.joint = true;
        row.seed = detail::cell_seed(spec.seed, Experiment::sim3, n, k, 0, std::nan(""), m);
        cells.push_back({std::move(row), candidate_grid({ModelType::sbm, ModelType::dcbm}, k + spec.extra_k)});
      }
    }
  }
  return detail::run_cells(std::move(cells), spec, [](const SuccessRow& row, Rng& rng) -> ModelParams {
    return sim3_params(row.n, row.K, row.model, rng);
  });
}

inline void write_csv(std::ostream& out, const SuccessTable& t) {
  out << "experiment,n,K,n1,r,model,reps,success_rate,under_rate,p_type,p_k_given_type,seed\n";
  for (const auto& row : t.rows) {
    out << row.experiment << ',' << row.n << ',' << row.K << ',' << (row.n1 ? std::to_string(row.n1) : "") << ','
        << detail::format_number(row.r) << ',' << to_string(row.model) << ',' << row.reps << ','
        << detail::format_number(row.success_rate()) << ',' << detail::format_number(row.under_rate()) << ','
        << (row.joint ? detail::format_number(row.type_rate()) : "") << ','
        << (row.joint ? detail::format_number(row.k_given_type_rate()) : "") << ',' << row.seed << '\n';
  }
}

inline Json table_json(const SuccessTable& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json j{{"experiment", row.experiment}, {"n", row.n}, {"K", row.K}};
    if (row.n1) j["n1"] = row.n1;
    if (!std::isnan(row.r)) j["r"] = row.r;
    j["model"] = to_string(row.model);
    j["reps"] = row.reps;
    j["success_rate"] = detail::number_or_null(row.success_rate());
    j["under_rate"] = detail::number_or_null(row.under_rate());
    if (row.joint) {
      j["p_type"] = detail::number_or_null(row.type_rate());
      j["p_k_given_type"] = detail::number_or_null(row.k_given_type_rate());
    }
    j["seed"] = row.seed;
    rows.push_back(std::move(j));
  }
  return Json{{"seed", t.seed}, {"V", t.folds}, {"loss", to_string(t.loss)},
              {"candidates", "1..K+" + std::to_string(t.extra_k)}, {"rows", std::move(rows)}};
}

/// Political blogs analysis: NCV over {SBM, DCBM} x {1..kmax} on the largest
/// connected component, repeated over independent splits.
struct PolblogsResult {
  std::size_t nodes_in_file = 0;
  std::size_t nodes_in_component = 0;
  SelectionFrequency selections;
  std::vector<CandidateResult> loss_curve;  // totals from the first split
};

inline constexpr std::string_view polblogs_hint =
    "download the political blogs network (polblogs.gml from Mark Newman's network data page, "
    "http://www-personal.umich.edu/~mejn/netdata/) and pass the .gml file or an edge list converted from it";

inline PolblogsResult run_polblogs(const std::filesystem::path& path, std::size_t reps, const NcvOptions& opt,
                                   std::uint64_t seed, int kmax = 6) {
  if (!std::filesystem::exists(path)) {
    throw Error("polblogs input '" + path.string() + "' not found; " + std::string(polblogs_hint));
  }
  const LabeledGraph graph = load_graph_file(path, true);
  Subgraph lcc = largest_connected_component(graph.adjacency);
  const auto candidates = candidate_grid({ModelType::sbm, ModelType::dcbm}, kmax);
  PolblogsResult out;
  out.nodes_in_file = graph.adjacency.n();
  out.nodes_in_component = lcc.adjacency.n();
  out.selections = repeat_ncv(lcc.adjacency, candidates, opt, reps, seed);
  out.loss_curve = out.selections.reports.front().candidates;
  return out;
}

/// CSV of (model, K, total_loss) for plotting.
inline void write_loss_curve_csv(std::ostream& out, const std::vector<CandidateResult>& curve) {
  out << "model,K,total_loss\n";
  char buf[40];
  for (const auto& c : curve) {
    std::snprintf(buf, sizeof buf, "%.10g", c.total);
    out << to_string(c.candidate.model) << ',' << c.candidate.K << ',' << buf << '\n';
  }
}

/// One row per candidate: how often it was selected.
inline void write_frequency_csv(std::ostream& out, const SelectionFrequency& f) {
  out << "model,K,count,frequency,reps,seed\n";
  for (const auto& [c, count] : f.counts) {
    out << to_string(c.model) << ',' << c.K << ',' << count << ',' << detail::format_number(f.frequency(c)) << ','
        << f.reps << ',' << f.master_seed << '\n';
  }
}

}  // namespace netcv
