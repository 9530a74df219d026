#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "digrac/graph.hpp"
#include "digrac/model.hpp"
#include "digrac/types.hpp"

namespace digrac::io {

/// Parsed edge-list text. Node tokens that are all non-negative integers are
/// used as ids directly; otherwise tokens are numbered in order of first
/// appearance and `names` holds the token of each id.
struct EdgeList {
  std::vector<Edge> edges;
  std::vector<std::string> names;  // empty when ids were integers
  Index num_nodes = 0;
};

/// `src<TAB or space>dst[<sep>weight]` per line, `#` starts a comment.
/// Errors are EdgeError carrying the 1-based line number.
EdgeList parse_edge_list(std::istream& in, const std::string& source = "<input>");
EdgeList read_edge_list(const std::filesystem::path& path);

void write_edge_list(std::ostream& out, const SparseDigraph& g);
void write_edge_list(const std::filesystem::path& path, const SparseDigraph& g);

/// Two-column CSV `new_id,original`.
void write_mapping_csv(const std::filesystem::path& path, const std::vector<std::string>& original);

/// One integer label per line (position = node id), or `node label` pairs.
/// `names` resolves the node tokens of the two-column form.
std::vector<int> read_labels(const std::filesystem::path& path,
                             const std::vector<std::string>& names = {});
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);

/// Dense numeric CSV. A first line that does not parse as numbers is taken as
/// a header and skipped.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header = {});

/// JSON checkpoint: {"format", "shape": {...}, "tensors": {name: {rows, cols,
/// data}}}. Tensors are row-major; values are decimal text with round-trip
/// precision, so the file has no byte order.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_checkpoint(const std::filesystem::path& path);

struct DatasetPaths {
  std::filesystem::path edges;
  std::optional<std::filesystem::path> features;
  std::optional<std::filesystem::path> labels;
};

struct DatasetOptions {
  bool largest_component = true;
  bool ratio_transform = false;  // A_ij <- A_ij / (A_ij + A_ji)
};

struct Dataset {
  SparseDigraph graph;
  std::optional<Matrix> features;
  std::optional<std::vector<int>> labels;
  // Original token of every node id in `graph`.
  std::vector<std::string> node_names;
};

Dataset load_dataset(const DatasetPaths& paths, const DatasetOptions& options = {});

}  // namespace digrac::io
