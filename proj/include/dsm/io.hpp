#ifndef DSM_IO_HPP
#define DSM_IO_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsm/gibbs.hpp"
#include "dsm/model.hpp"

namespace dsm {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Numeric CSV with a header row. Empty cells parse as NaN.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column position by name, or -1.
  long column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// data.csv: `index,y[,x1..xp][,coord | ,lat,lon]`, index 1-based and
/// contiguous. Without x columns the design is a single intercept; without
/// coordinate columns coord = index.
DatasetView read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const DatasetView& data);

/// Any CSV with an `index` column and a value column; returns 0-based indices.
struct IndexedValues {
  std::vector<std::size_t> index;
  std::vector<double> value;
};
IndexedValues read_indexed(const std::filesystem::path& path, const std::string& value_column);
/// Indices only (1-based in the file, 0-based returned), sorted and deduplicated.
std::vector<std::size_t> read_index_set(const std::filesystem::path& path);

void write_truth(const std::filesystem::path& path, const Eigen::VectorXd& mu);
void write_index_set(const std::filesystem::path& path, const std::vector<std::size_t>& indices);
void write_predictions(const std::filesystem::path& path, const ChainOutput& out);
void write_trace(const std::filesystem::path& path, const ChainOutput& out);

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace dsm

#endif  // DSM_IO_HPP
