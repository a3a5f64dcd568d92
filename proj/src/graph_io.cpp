#include "evoter/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "evoter/errors.hpp"

namespace evoter {

void write_snapshot(std::ostream& out, const OpinionGraph& g) {
  const std::size_t n = g.vertex_count();
  const double mean = n == 0 ? 0.0 : static_cast<double>(g.degree_sum()) / static_cast<double>(n);
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, mean);
  out << n << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
  std::string line(n, '0');
  for (Vertex v = 0; v < n; ++v) line[v] = g.opinion(v) ? '1' : '0';
  out << line << '\n';
  for (const Edge& e : g.edges()) out << e.a << ' ' << e.b << '\n';
}

OpinionGraph read_snapshot(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw InvalidInput("snapshot: missing header");
  std::istringstream hs(header);
  std::size_t n = 0;
  double mean = 0.0;
  if (!(hs >> n >> mean)) throw InvalidInput("snapshot: header must be 'N L_mean'");

  std::string ops;
  if (!std::getline(in, ops)) throw InvalidInput("snapshot: missing opinion line");
  if (!ops.empty() && ops.back() == '\r') ops.pop_back();
  if (ops.size() != n) throw InvalidInput("snapshot: opinion line length differs from N");

  OpinionGraph g(n);
  std::string line;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::uint64_t u = 0;
    std::uint64_t v = 0;
    if (!(ls >> u >> v) || u >= n || v >= n) {
      throw InvalidInput("snapshot: bad edge on line " + std::to_string(lineno));
    }
    try {
      g.add_edge(static_cast<Vertex>(u), static_cast<Vertex>(v));
    } catch (const ContractError& e) {
      throw InvalidInput("snapshot line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  std::vector<Opinion> opinions(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (ops[v] != '0' && ops[v] != '1') throw InvalidInput("snapshot: opinions must be 0/1");
    opinions[v] = ops[v] == '1' ? 1 : 0;
  }
  g.set_opinions(opinions);
  return g;
}

void save_snapshot(const std::filesystem::path& path, const OpinionGraph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_snapshot(out, g);
}

OpinionGraph load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  return read_snapshot(in);
}

}  // namespace evoter
