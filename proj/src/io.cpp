#include "dsm/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include "dsm/error.hpp"

namespace dsm {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_cell(const std::string& raw, const std::filesystem::path& path, std::size_t line) {
  const std::string s = trim(raw);
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  double value = 0.0;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidParameter(path.string() + ":" + std::to_string(line) + ": not a number: '" + s + "'");
  }
  return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

std::size_t checked_index(double raw, const std::filesystem::path& path) {
  if (!(raw >= 1.0) || raw != std::floor(raw)) {
    throw InvalidParameter(path.string() + ": index values must be positive integers");
  }
  return static_cast<std::size_t>(raw) - 1;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

long CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<long>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path.string());
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (table.header.empty()) {
      for (const auto& c : cells) table.header.push_back(trim(c));
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw InvalidParameter(path.string() + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(table.header.size()) + " fields, found " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_cell(c, path, lineno));
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw InvalidParameter(path.string() + ": empty CSV");
  return table;
}

DatasetView read_dataset(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const long ix = t.column("index"), iy = t.column("y");
  if (ix < 0 || iy < 0) throw InvalidParameter(path.string() + ": header must start with index,y");

  std::vector<long> xcols;
  const std::regex xname("x([0-9]+)");
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (std::regex_match(t.header[c], xname)) xcols.push_back(static_cast<long>(c));
  }
  std::vector<long> ccols;
  if (t.column("coord") >= 0) {
    ccols = {t.column("coord")};
  } else if (t.column("lat") >= 0 && t.column("lon") >= 0) {
    ccols = {t.column("lat"), t.column("lon")};
  }

  const auto N = static_cast<Eigen::Index>(t.rows.size());
  if (N == 0) throw InvalidParameter(path.string() + ": no observations");
  DatasetView data;
  data.y.resize(N);
  data.x = xcols.empty() ? Eigen::MatrixXd::Ones(N, 1) : Eigen::MatrixXd(N, static_cast<Eigen::Index>(xcols.size()));
  data.coords.resize(N, ccols.empty() ? 1 : static_cast<Eigen::Index>(ccols.size()));
  for (Eigen::Index r = 0; r < N; ++r) {
    const auto& row = t.rows[static_cast<std::size_t>(r)];
    if (checked_index(row[static_cast<std::size_t>(ix)], path) != static_cast<std::size_t>(r)) {
      throw InvalidParameter(path.string() + ": index column must be 1..N in order (row " + std::to_string(r + 1) + ")");
    }
    data.y(r) = row[static_cast<std::size_t>(iy)];
    for (std::size_t c = 0; c < xcols.size(); ++c) data.x(r, static_cast<Eigen::Index>(c)) = row[static_cast<std::size_t>(xcols[c])];
    if (ccols.empty()) {
      data.coords(r, 0) = static_cast<double>(r + 1);
    } else {
      for (std::size_t c = 0; c < ccols.size(); ++c) data.coords(r, static_cast<Eigen::Index>(c)) = row[static_cast<std::size_t>(ccols[c])];
    }
  }
  data.validate();
  return data;
}

void write_dataset(const std::filesystem::path& path, const DatasetView& data) {
  auto os = open_out(path);
  const bool intercept_only = data.x.cols() == 1 && (data.x.array() == 1.0).all();
  const Eigen::Index N = data.y.size();
  bool default_coords = data.coords.cols() == 1;
  for (Eigen::Index i = 0; default_coords && i < N; ++i) default_coords = data.coords(i, 0) == static_cast<double>(i + 1);

  os << "index,y";
  if (!intercept_only) {
    for (Eigen::Index c = 0; c < data.x.cols(); ++c) os << ",x" << (c + 1);
  }
  if (!default_coords) os << (data.coords.cols() == 2 ? ",lat,lon" : ",coord");
  os << '\n';
  for (Eigen::Index i = 0; i < N; ++i) {
    os << (i + 1) << ',' << format_double(data.y(i));
    if (!intercept_only) {
      for (Eigen::Index c = 0; c < data.x.cols(); ++c) os << ',' << format_double(data.x(i, c));
    }
    if (!default_coords) {
      for (Eigen::Index c = 0; c < data.coords.cols(); ++c) os << ',' << format_double(data.coords(i, c));
    }
    os << '\n';
  }
  finish(os, path);
}

IndexedValues read_indexed(const std::filesystem::path& path, const std::string& value_column) {
  const CsvTable t = read_csv(path);
  const long ix = t.column("index"), iv = t.column(value_column);
  if (ix < 0 || iv < 0) throw InvalidParameter(path.string() + ": needs columns index," + value_column);
  IndexedValues out;
  for (const auto& row : t.rows) {
    out.index.push_back(checked_index(row[static_cast<std::size_t>(ix)], path));
    out.value.push_back(row[static_cast<std::size_t>(iv)]);
  }
  return out;
}

std::vector<std::size_t> read_index_set(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  const long ix = t.column("index");
  if (ix < 0) throw InvalidParameter(path.string() + ": needs an index column");
  std::vector<std::size_t> idx;
  for (const auto& row : t.rows) idx.push_back(checked_index(row[static_cast<std::size_t>(ix)], path));
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

void write_truth(const std::filesystem::path& path, const Eigen::VectorXd& mu) {
  auto os = open_out(path);
  os << "index,mu\n";
  for (Eigen::Index i = 0; i < mu.size(); ++i) os << (i + 1) << ',' << format_double(mu(i)) << '\n';
  finish(os, path);
}

void write_index_set(const std::filesystem::path& path, const std::vector<std::size_t>& indices) {
  auto os = open_out(path);
  os << "index\n";
  for (std::size_t i : indices) os << (i + 1) << '\n';
  finish(os, path);
}

void write_predictions(const std::filesystem::path& path, const ChainOutput& out) {
  auto os = open_out(path);
  os << "index,mu_hat,var_hat\n";
  for (std::size_t k = 0; k < out.prediction_set.size(); ++k) {
    const auto e = static_cast<Eigen::Index>(k);
    os << (out.prediction_set[k] + 1) << ',' << format_double(out.mu_hat(e)) << ',' << format_double(out.mu_var(e))
       << '\n';
  }
  finish(os, path);
}

void write_trace(const std::filesystem::path& path, const ChainOutput& out) {
  auto os = open_out(path);
  os << "iteration";
  const Eigen::Index p = out.trace.empty() ? 0 : out.trace.front().beta.size();
  for (Eigen::Index c = 0; c < p; ++c) os << ",beta" << (c + 1);
  os << ",sigma2,sigma2_eta,sigma2_xi,sigma2_beta\n";
  for (const auto& row : out.trace) {
    os << row.iteration;
    for (Eigen::Index c = 0; c < p; ++c) os << ',' << format_double(row.beta(c));
    os << ',' << format_double(row.sigma2) << ',' << format_double(row.sigma2_eta) << ','
       << format_double(row.sigma2_xi) << ',' << format_double(row.sigma2_beta) << '\n';
  }
  finish(os, path);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  auto os = open_out(path);
  os << content;
  finish(os, path);
}

}  // namespace dsm
