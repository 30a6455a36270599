#include "ising/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_set>

namespace ising {

using nlohmann::json;

IsingModel parse_model_file(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelParseError(ModelParseErrorKind::MalformedField, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("num_vertices") || !doc.contains("edges") ||
      !doc["num_vertices"].is_number_integer() || !doc["edges"].is_array())
    throw ModelParseError(ModelParseErrorKind::MalformedField,
                          "expected an object with num_vertices and edges");
  const long long n = doc["num_vertices"].get<long long>();
  if (n < 0 || n > (1ll << 31))
    throw ModelParseError(ModelParseErrorKind::MalformedField, "num_vertices out of range");

  std::vector<std::pair<int, int>> edges;
  std::vector<double> couplings;
  std::unordered_set<std::int64_t> seen;
  for (const auto& rec : doc["edges"]) {
    if (!rec.is_object() || !rec.contains("u") || !rec.contains("v") || !rec.contains("j") ||
        !rec["u"].is_number_integer() || !rec["v"].is_number_integer() || !rec["j"].is_number())
      throw ModelParseError(ModelParseErrorKind::MalformedField, "edge record must be {u, v, j}");
    const long long u = rec["u"].get<long long>();
    const long long v = rec["v"].get<long long>();
    const double j = rec["j"].get<double>();
    if (u < 0 || u >= n || v < 0 || v >= n)
      throw ModelParseError(ModelParseErrorKind::OutOfRangeIndex,
                            "edge endpoint out of range: (" + std::to_string(u) + "," + std::to_string(v) + ")");
    if (u == v)
      throw ModelParseError(ModelParseErrorKind::SelfLoop, "self-loop at vertex " + std::to_string(u));
    const std::int64_t key = std::min(u, v) * n + std::max(u, v);
    if (!seen.insert(key).second)
      throw ModelParseError(ModelParseErrorKind::DuplicateEdge,
                            "duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    if (!std::isfinite(j))
      throw ModelParseError(ModelParseErrorKind::MalformedField, "non-finite coupling");
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    couplings.push_back(j);
  }
  IsingModel m{Graph(static_cast<int>(n), edges), std::move(couplings)};
  return m;
}

std::string write_model_file(const IsingModel& m) {
  // Canonical form: u < v per record, records sorted by (u, v).
  struct Rec {
    int u, v;
    double j;
  };
  std::vector<Rec> recs;
  recs.reserve(m.graph.num_edges());
  for (const Edge& e : m.graph.edges()) {
    const auto [u, v] = std::minmax(e.u, e.v);
    recs.push_back({u, v, m.coupling[e.id]});
  }
  std::sort(recs.begin(), recs.end(),
            [](const Rec& a, const Rec& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  json edges = json::array();
  for (const Rec& r : recs) edges.push_back({{"u", r.u}, {"v", r.v}, {"j", r.j}});
  json doc{{"num_vertices", m.graph.num_vertices()}, {"edges", std::move(edges)}};
  return doc.dump(2) + "\n";
}

IsingModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model_file(ss.str());
}

void save_model(const IsingModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write " + path);
  out << write_model_file(m);
}

}  // namespace ising
