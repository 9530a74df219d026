#include "digrac/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace digrac::io {

namespace {

using nlohmann::json;

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

std::vector<std::string> split_fields(const std::string& line, bool commas) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r' || (commas && c == ',')) {
      if (!field.empty()) out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (!field.empty()) out.push_back(std::move(field));
  return out;
}

std::optional<long long> parse_int(const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_double(const std::string& s) {
  // strtod rather than from_chars: libstdc++ 11 lacks the double overload on
  // some targets.
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

[[noreturn]] void fail(std::size_t line, const std::string& source, const std::string& what) {
  throw EdgeError(line, source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

EdgeList parse_edge_list(std::istream& in, const std::string& source) {
  struct Row {
    std::string src, dst;
    double weight;
  };
  std::vector<Row> rows;
  std::vector<std::size_t> row_lines;
  bool integer_ids = true;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto fields = split_fields(strip_comment(line), false);
    if (fields.empty()) continue;
    if (fields.size() != 2 && fields.size() != 3)
      fail(lineno, source, "expected `src dst [weight]`, got " + std::to_string(fields.size()) +
                               " fields");
    double w = 1.0;
    if (fields.size() == 3) {
      const auto parsed = parse_double(fields[2]);
      if (!parsed) fail(lineno, source, "weight `" + fields[2] + "` is not a number");
      w = *parsed;
      if (!std::isfinite(w)) fail(lineno, source, "weight is not finite");
      if (w < 0.0) fail(lineno, source, "negative weight " + fields[2]);
    }
    for (int f = 0; f < 2; ++f) {
      const auto id = parse_int(fields[f]);
      if (!id || *id < 0) integer_ids = false;
    }
    rows.push_back({fields[0], fields[1], w});
    row_lines.push_back(lineno);
  }

  EdgeList out;
  out.edges.reserve(rows.size());
  if (integer_ids) {
    long long max_id = -1;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const long long s = *parse_int(rows[r].src);
      const long long d = *parse_int(rows[r].dst);
      if (s > INT32_MAX || d > INT32_MAX) fail(row_lines[r], source, "node id exceeds 2^31-1");
      max_id = std::max({max_id, s, d});
      out.edges.push_back({static_cast<NodeId>(s), static_cast<NodeId>(d), rows[r].weight});
    }
    out.num_nodes = max_id + 1;
  } else {
    std::unordered_map<std::string, NodeId> ids;
    auto intern = [&](const std::string& token) {
      const auto [it, inserted] = ids.try_emplace(token, static_cast<NodeId>(out.names.size()));
      if (inserted) out.names.push_back(token);
      return it->second;
    };
    for (const Row& r : rows) {
      const NodeId s = intern(r.src);
      const NodeId d = intern(r.dst);
      out.edges.push_back({s, d, r.weight});
    }
    out.num_nodes = static_cast<Index>(out.names.size());
  }
  return out;
}

EdgeList read_edge_list(const std::filesystem::path& path) {
  auto in = open_in(path);
  return parse_edge_list(in, path.string());
}

void write_edge_list(std::ostream& out, const SparseDigraph& g) {
  out << std::setprecision(17);
  for (const Edge& e : g.edges()) out << e.src << '\t' << e.dst << '\t' << e.weight << '\n';
}

void write_edge_list(const std::filesystem::path& path, const SparseDigraph& g) {
  auto out = open_out(path);
  out << "# src\tdst\tweight; n=" << g.num_nodes() << '\n';
  write_edge_list(out, g);
}

void write_mapping_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& original) {
  auto out = open_out(path);
  out << "new_id,original\n";
  for (std::size_t i = 0; i < original.size(); ++i) out << i << ',' << original[i] << '\n';
}

std::vector<int> read_labels(const std::filesystem::path& path,
                             const std::vector<std::string>& names) {
  auto in = open_in(path);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], i);

  std::vector<int> positional;
  std::vector<std::pair<std::size_t, int>> keyed;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto fields = split_fields(strip_comment(line), true);
    if (fields.empty()) continue;
    const auto label = parse_int(fields.back());
    if (!label || *label < 0 || *label > INT32_MAX)
      fail(lineno, path.string(), "label `" + fields.back() + "` is not a non-negative integer");
    if (fields.size() == 1) {
      positional.push_back(static_cast<int>(*label));
    } else if (fields.size() == 2) {
      std::size_t node = 0;
      if (!names.empty()) {
        const auto it = index.find(fields[0]);
        if (it == index.end()) fail(lineno, path.string(), "unknown node `" + fields[0] + "`");
        node = it->second;
      } else {
        const auto id = parse_int(fields[0]);
        if (!id || *id < 0) fail(lineno, path.string(), "node id `" + fields[0] + "` is invalid");
        node = static_cast<std::size_t>(*id);
      }
      keyed.emplace_back(node, static_cast<int>(*label));
    } else {
      fail(lineno, path.string(), "expected `label` or `node label`");
    }
  }
  if (!positional.empty() && !keyed.empty())
    throw InputError(path.string() + ": mixes one- and two-column label lines");
  if (keyed.empty()) return positional;

  std::size_t n = names.size();
  for (const auto& [node, label] : keyed) n = std::max(n, node + 1);
  std::vector<int> out(n, -1);
  for (const auto& [node, label] : keyed) out[node] = label;
  for (std::size_t i = 0; i < n; ++i)
    if (out[i] < 0) throw InputError(path.string() + ": node " + std::to_string(i) + " has no label");
  return out;
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = open_out(path);
  for (int l : labels) out << l << '\n';
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    const auto fields = split_fields(line, true);
    if (fields.empty()) continue;
    std::vector<double> row;
    row.reserve(fields.size());
    bool numeric = true;
    for (const auto& f : fields) {
      const auto v = parse_double(f);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;  // header
      fail(lineno, path.string(), "non-numeric field");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      fail(lineno, path.string(), "expected " + std::to_string(rows.front().size()) + " columns");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header) {
  auto out = open_out(path);
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
  }
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  json doc;
  doc["format"] = "digrac-checkpoint-v1";
  doc["shape"] = {{"input_dim", params.shape.input_dim},
                  {"hidden", params.shape.hidden},
                  {"clusters", params.shape.clusters},
                  {"hops", params.shape.hops},
                  {"dropout", params.shape.dropout}};
  json tensors = json::object();
  for (const auto& t : params.tensors())
    tensors[std::string(t.name)] = {{"rows", t.rows},
                                    {"cols", t.cols},
                                    {"data", std::vector<double>(t.data, t.data + t.size())}};
  doc["tensors"] = std::move(tensors);
  auto out = open_out(path);
  out << doc.dump(1) << '\n';
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  auto in = open_in(path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  if (doc.value("format", "") != "digrac-checkpoint-v1")
    throw InputError(path.string() + ": not a digrac checkpoint");
  try {
    ModelShape shape;
    const auto& s = doc.at("shape");
    shape.input_dim = s.at("input_dim").get<Index>();
    shape.hidden = s.at("hidden").get<Index>();
    shape.clusters = s.at("clusters").get<int>();
    shape.hops = s.at("hops").get<int>();
    shape.dropout = s.at("dropout").get<double>();
    ModelParams params = ModelParams::zeros(shape);
    for (auto& t : params.tensors()) {
      const auto& entry = doc.at("tensors").at(std::string(t.name));
      const auto data = entry.at("data").get<std::vector<double>>();
      if (entry.at("rows").get<Index>() != t.rows || entry.at("cols").get<Index>() != t.cols ||
          static_cast<Index>(data.size()) != t.size())
        throw InputError(path.string() + ": tensor " + std::string(t.name) +
                         " does not match the shape header");
      std::copy(data.begin(), data.end(), t.data);
    }
    return params;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

Dataset load_dataset(const DatasetPaths& paths, const DatasetOptions& options) {
  const EdgeList list = read_edge_list(paths.edges);
  Dataset out;

  std::optional<std::vector<int>> labels;
  if (paths.labels) labels = read_labels(*paths.labels, list.names);
  std::optional<Matrix> features;
  if (paths.features) features = read_matrix_csv(*paths.features);

  // Labels and features may name isolated nodes beyond the largest edge id.
  Index n = list.num_nodes;
  if (list.names.empty()) {
    if (labels) n = std::max<Index>(n, static_cast<Index>(labels->size()));
    if (features) n = std::max<Index>(n, features->rows());
  }
  if (labels && static_cast<Index>(labels->size()) != n)
    throw InputError("labels cover " + std::to_string(labels->size()) + " nodes, graph has " +
                     std::to_string(n));
  if (features && features->rows() != n)
    throw InputError("features have " + std::to_string(features->rows()) + " rows, graph has " +
                     std::to_string(n) + " nodes");

  SparseDigraph g = SparseDigraph::from_edges(list.edges, n);
  std::vector<NodeId> new_to_old(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) new_to_old[static_cast<std::size_t>(i)] = static_cast<NodeId>(i);
  if (options.largest_component) {
    ComponentExtraction c = largest_weakly_connected_component(g);
    g = std::move(c.graph);
    new_to_old = std::move(c.new_to_old);
  }
  if (options.ratio_transform) g = ratio_transform(g);

  out.graph = std::move(g);
  out.node_names.reserve(new_to_old.size());
  for (NodeId old : new_to_old)
    out.node_names.push_back(list.names.empty() ? std::to_string(old)
                                                : list.names[static_cast<std::size_t>(old)]);
  if (labels) {
    std::vector<int> remapped;
    remapped.reserve(new_to_old.size());
    for (NodeId old : new_to_old) remapped.push_back((*labels)[static_cast<std::size_t>(old)]);
    out.labels = std::move(remapped);
  }
  if (features) {
    Matrix remapped(static_cast<Index>(new_to_old.size()), features->cols());
    for (std::size_t i = 0; i < new_to_old.size(); ++i)
      remapped.row(static_cast<Index>(i)) = features->row(new_to_old[i]);
    out.features = std::move(remapped);
  }
  return out;
}

}  // namespace digrac::io
