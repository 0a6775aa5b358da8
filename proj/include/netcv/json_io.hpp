#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "netcv/block_models.hpp"
#include "netcv/estimators.hpp"
#include "netcv/ncv.hpp"

namespace netcv {

using Json = nlohmann::ordered_json;

inline Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw Error("expected a non-empty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw Error("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

/// Labels are written 1-based.
inline Json labels_json(const Membership& g) {
  Json out = Json::array();
  for (int l : g.labels) out.push_back(l + 1);
  return out;
}

inline Membership labels_from_json(const Json& j) {
  std::vector<int> labels;
  int k = 0;
  for (const auto& v : j) {
    const int l = v.get<int>();
    if (l < 1) throw Error("labels must be 1-based positive integers");
    labels.push_back(l - 1);
    k = std::max(k, l);
  }
  return Membership(std::move(labels), k);
}

inline Json candidate_json(const Candidate& c) { return Json{{"model", to_string(c.model)}, {"K", c.K}}; }

inline Json report_json(const NcvReport& r) {
  Json candidates = Json::array();
  for (const auto& c : r.candidates) {
    candidates.push_back(Json{{"model", to_string(c.candidate.model)},
                              {"K", c.candidate.K},
                              {"fold_losses", c.fold_losses},
                              {"total", c.total}});
  }
  return Json{{"seed", r.seed},
              {"V", r.V},
              {"loss", to_string(r.loss)},
              {"candidates", std::move(candidates)},
              {"selected", candidate_json(r.selected)}};
}

inline Json frequency_json(const SelectionFrequency& f) {
  Json table = Json::array();
  for (const auto& [c, count] : f.counts) {
    Json row = candidate_json(c);
    row["count"] = count;
    row["frequency"] = f.frequency(c);
    table.push_back(std::move(row));
  }
  return Json{{"seed", f.master_seed}, {"reps", f.reps}, {"selections", std::move(table)},
              {"modal", candidate_json(f.modal())}};
}

inline Json params_json(const SbmParams& p) {
  return Json{{"model", "sbm"}, {"K", p.g.k}, {"B", matrix_json(p.B.matrix())}, {"labels", labels_json(p.g)}};
}

inline Json params_json(const DcbmParams& p) {
  return Json{{"model", "dcbm"},
              {"K", p.g.k},
              {"B", matrix_json(p.B.matrix())},
              {"labels", labels_json(p.g)},
              {"psi", p.psi.values()}};
}

inline Json params_json(const ModelParams& p) {
  return std::visit([](const auto& x) { return params_json(x); }, p);
}

/// Inverse of params_json. "psi" selects the degree-corrected model.
inline ModelParams params_from_json(const Json& j) {
  Membership g = labels_from_json(j.at("labels"));
  BlockMatrix b(matrix_from_json(j.at("B")));
  if (b.k() != g.k) throw Error("params: B size differs from the largest label");
  if (j.contains("psi")) {
    auto psi = j.at("psi").get<std::vector<double>>();
    DegreeParams d(std::move(psi), g);
    return DcbmParams(std::move(g), std::move(b), std::move(d));
  }
  return SbmParams(std::move(g), std::move(b));
}

inline Json fit_json(const SbmFit& f) {
  return Json{{"model", "sbm"}, {"K", f.g_hat.k}, {"B_hat", matrix_json(f.B_hat.matrix())},
              {"labels", labels_json(f.g_hat)}, {"fallbacks", f.fallbacks}};
}

inline Json fit_json(const DcbmFit& f) {
  return Json{{"model", "dcbm"},
              {"K", f.g_hat.k},
              {"B_prime_hat", matrix_json(f.B_prime_hat)},
              {"labels", labels_json(f.g_hat)},
              {"psi_prime_hat", f.psi_prime_hat},
              {"fallbacks", f.fallbacks}};
}

inline Json fit_json(const Fit& f) {
  return std::visit([](const auto& x) { return fit_json(x); }, f);
}

}  // namespace netcv
