#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "netcv/graph.hpp"

namespace netcv {

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Graph read from text together with the node tokens, in order of first
/// appearance: node_ids[k] is the token of node k.
struct LabeledGraph {
  AdjacencyMatrix adjacency;
  std::vector<std::string> node_ids;
};

/// Parse an edge list: two whitespace-separated tokens per line, '#' starts a
/// comment line, blank lines skipped. With `symmetrize` every listed pair is
/// an undirected edge; without it only reciprocated pairs are kept.
inline LabeledGraph parse_edge_list(std::istream& in, bool symmetrize = true) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> ids;
  std::set<Edge> arcs;

  auto intern = [&](const std::string& token) {
    auto [it, inserted] = index.try_emplace(token, ids.size());
    if (inserted) ids.push_back(token);
    return it->second;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a >> b)) throw ParseError("expected two node tokens", lineno);
    if (fields >> extra) throw ParseError("unexpected third token '" + extra + "'", lineno);
    const std::size_t u = intern(a);
    const std::size_t v = intern(b);
    if (u != v) arcs.emplace(u, v);
  }
  if (ids.empty()) throw Error("edge list is empty");

  std::vector<Edge> edges;
  for (const auto& [u, v] : arcs) {
    if (symmetrize || arcs.contains({v, u})) edges.emplace_back(u, v);
  }
  return {AdjacencyMatrix(ids.size(), edges), std::move(ids)};
}

inline LabeledGraph load_edge_list(const std::filesystem::path& path, bool symmetrize = true) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open edge list '" + path.string() + "'");
  return parse_edge_list(in, symmetrize);
}

/// Minimal GML reader: node ids from `node [ id X ... ]` blocks and pairs
/// from `edge [ source X target Y ... ]` blocks. Other attributes are skipped.
inline LabeledGraph parse_gml(std::istream& in, bool symmetrize = true) {
  std::vector<std::string> tokens;
  std::size_t lineno = 0;
  std::vector<std::size_t> token_line;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t pos = 0;
    while (pos < line.size()) {
      if (std::isspace(static_cast<unsigned char>(line[pos]))) {
        ++pos;
      } else if (line[pos] == '"') {
        const auto close = line.find('"', pos + 1);
        if (close == std::string::npos) throw ParseError("unterminated string", lineno);
        tokens.push_back(line.substr(pos, close - pos + 1));
        token_line.push_back(lineno);
        pos = close + 1;
      } else {
        const auto stop = line.find_first_of(" \t\r\"", pos);
        tokens.push_back(line.substr(pos, stop - pos));
        token_line.push_back(lineno);
        pos = stop == std::string::npos ? line.size() : stop;
      }
    }
  }

  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> ids;
  auto intern = [&](const std::string& token) {
    auto [it, inserted] = index.try_emplace(token, ids.size());
    if (inserted) ids.push_back(token);
    return it->second;
  };

  std::set<Edge> arcs;
  for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
    const bool is_node = tokens[t] == "node";
    const bool is_edge = tokens[t] == "edge";
    if ((!is_node && !is_edge) || tokens[t + 1] != "[") continue;
    std::string id, source, target;
    int depth = 0;
    std::size_t u = t + 1;
    for (; u < tokens.size(); ++u) {
      if (tokens[u] == "[") {
        ++depth;
      } else if (tokens[u] == "]") {
        if (--depth == 0) break;
      } else if (depth == 1 && u + 1 < tokens.size()) {
        if (is_node && tokens[u] == "id") id = tokens[u + 1];
        if (is_edge && tokens[u] == "source") source = tokens[u + 1];
        if (is_edge && tokens[u] == "target") target = tokens[u + 1];
      }
    }
    if (u == tokens.size()) throw ParseError("unbalanced brackets", token_line[t]);
    if (is_node) {
      if (id.empty()) throw ParseError("node without id", token_line[t]);
      intern(id);
    } else {
      if (source.empty() || target.empty()) throw ParseError("edge without source or target", token_line[t]);
      const std::size_t a = intern(source);
      const std::size_t b = intern(target);
      if (a != b) arcs.emplace(a, b);
    }
    t = u;
  }
  if (ids.empty()) throw Error("GML file has no nodes");

  std::vector<Edge> edges;
  for (const auto& [a, b] : arcs) {
    if (symmetrize || arcs.contains({b, a})) edges.emplace_back(a, b);
  }
  return {AdjacencyMatrix(ids.size(), edges), std::move(ids)};
}

/// Edge list, or GML when the extension is .gml.
inline LabeledGraph load_graph_file(const std::filesystem::path& path, bool symmetrize = true) {
  if (path.extension() != ".gml") return load_edge_list(path, symmetrize);
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return parse_gml(in, symmetrize);
}

/// One "i j" line per undirected edge with i < j. Uses `ids` for tokens when
/// given, otherwise the 0-based node index.
inline void write_edge_list(std::ostream& out, const AdjacencyMatrix& a,
                            const std::vector<std::string>& ids = {}) {
  for (const auto& [i, j] : a.edges()) {
    if (ids.empty()) {
      out << i << ' ' << j << '\n';
    } else {
      out << ids[i] << ' ' << ids[j] << '\n';
    }
  }
}

inline void write_edge_list(const std::filesystem::path& path, const AdjacencyMatrix& a,
                            const std::vector<std::string>& ids = {}) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  write_edge_list(out, a, ids);
}

}  // namespace netcv
