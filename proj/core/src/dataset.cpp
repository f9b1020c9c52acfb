#include "linktheft/dataset.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "linktheft/errors.hpp"

namespace fs = std::filesystem;

namespace linktheft {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

int parse_int(const std::string& path, int line_no, std::string_view tok) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(path, line_no,
                     "expected integer, got '" + std::string(tok) + "'");
  return value;
}

double parse_double(const std::string& path, int line_no,
                    const std::string& tok) {
  errno = 0;
  char* end = nullptr;
  double value = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || errno == ERANGE)
    throw ParseError(path, line_no, "expected number, got '" + tok + "'");
  return value;
}

std::vector<std::pair<int, int>> read_edge_file(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<std::pair<int, int>> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line) || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a >> b) || (ss >> extra))
      throw ParseError(path, line_no, "expected two node ids");
    raw.emplace_back(parse_int(path, line_no, a), parse_int(path, line_no, b));
  }
  return raw;
}

Matrix read_attr_csv(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      row.push_back(parse_double(path, line_no, tok));
    }
    if (row.empty()) throw ParseError(path, line_no, "empty attribute row");
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw ParseError(path, line_no,
                       "attribute row has " + std::to_string(row.size()) +
                           " columns, expected " + std::to_string(width));
    rows.push_back(std::move(row));
  }
  Matrix m(static_cast<int>(rows.size()), static_cast<int>(width));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < width; ++j)
      m.at(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  if (!m.all_finite()) throw NumericError(path + ": non-finite attribute");
  return m;
}

std::vector<std::pair<int, int>> read_label_csv(const std::string& path) {
  auto in = open_or_throw(path);
  std::vector<std::pair<int, int>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError(path, line_no, "expected 'node_id,class_id'");
    std::string a = line.substr(0, comma);
    std::string b = line.substr(comma + 1);
    while (!b.empty() && (b.back() == '\r' || b.back() == '\n')) b.pop_back();
    entries.emplace_back(parse_int(path, line_no, a),
                         parse_int(path, line_no, b));
  }
  return entries;
}

}  // namespace

void Dataset::validate() const {
  if (num_classes < 2) throw ConfigError("num_classes must be >= 2");
  if (attributes.rows != graph.node_count)
    throw IntegrityError("attribute rows (" + std::to_string(attributes.rows) +
                         ") != node count (" +
                         std::to_string(graph.node_count) + ")");
  if (static_cast<int>(labels.size()) != graph.node_count)
    throw IntegrityError("label vector length != node count");
  for (int i = 0; i < graph.node_count; ++i) {
    if (labels[i] >= num_classes)
      throw IntegrityError("node " + std::to_string(i) + " has class " +
                           std::to_string(labels[i]) + " >= num_classes");
  }
}

Dataset load_dataset(const std::string& graph_path,
                     const std::string& attr_path,
                     const std::string& label_path, int num_classes,
                     const std::string& name,
                     std::vector<std::string>* warnings) {
  Dataset ds;
  ds.name = name;
  ds.num_classes = num_classes;
  ds.attributes = read_attr_csv(attr_path);
  const int n = ds.attributes.rows;

  int dropped = 0;
  ds.graph = Graph::from_edges(n, read_edge_file(graph_path), &dropped);
  if (dropped > 0 && warnings) {
    warnings->push_back(graph_path + ": dropped " + std::to_string(dropped) +
                        " self-loop(s)");
  }

  ds.labels.assign(n, -1);
  for (auto [node, cls] : read_label_csv(label_path)) {
    if (node < 0 || node >= n)
      throw IntegrityError(label_path + ": label for node " +
                           std::to_string(node) + " outside [0, " +
                           std::to_string(n) + ")");
    if (cls < 0 || cls >= num_classes)
      throw IntegrityError(label_path + ": class " + std::to_string(cls) +
                           " outside [0, " + std::to_string(num_classes) + ")");
    ds.labels[node] = cls;
  }
  ds.validate();
  return ds;
}

Dataset load_bundle(const std::string& dir,
                    std::vector<std::string>* warnings) {
  const fs::path root(dir);
  const auto meta_path = root / "meta.json";
  auto in = open_or_throw(meta_path.string());
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(meta_path.string(), 0, e.what());
  }
  if (!meta.contains("num_classes"))
    throw ParseError(meta_path.string(), 0, "missing num_classes");
  Dataset ds = load_dataset((root / "edges.txt").string(),
                            (root / "attrs.csv").string(),
                            (root / "labels.csv").string(),
                            meta["num_classes"].get<int>(),
                            meta.value("name", root.filename().string()),
                            warnings);
  if (meta.contains("attr_dim") && meta["attr_dim"].get<int>() != ds.attr_dim())
    throw IntegrityError(meta_path.string() + ": attr_dim " +
                         meta["attr_dim"].dump() + " != attribute columns " +
                         std::to_string(ds.attr_dim()));
  return ds;
}

void write_bundle(const Dataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path root(dir);
  {
    std::ofstream out(root / "edges.txt");
    for (auto [u, v] : ds.graph.edges) out << u << ' ' << v << '\n';
  }
  {
    std::ofstream out(root / "attrs.csv");
    out.precision(17);
    for (int i = 0; i < ds.attributes.rows; ++i) {
      for (int j = 0; j < ds.attributes.cols; ++j) {
        if (j) out << ',';
        out << ds.attributes.at(i, j);
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(root / "labels.csv");
    for (int i = 0; i < ds.node_count(); ++i)
      if (ds.labels[i] >= 0) out << i << ',' << ds.labels[i] << '\n';
  }
  {
    nlohmann::json meta{{"name", ds.name},
                        {"num_classes", ds.num_classes},
                        {"attr_dim", ds.attr_dim()}};
    std::ofstream out(root / "meta.json");
    out << meta.dump(2) << '\n';
  }
}

}  // namespace linktheft
