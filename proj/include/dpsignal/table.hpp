#pragma once

#include "dpsignal/matrix.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dpsignal {

// AE x drug report-count table. Rows are adverse events, columns are drugs;
// one column (by default the last) is the collapsed "other drugs" reference.
// Construction validates every invariant, so a live object is always usable
// by the downstream models.
class ContingencyTable {
public:
  ContingencyTable(Matrix<std::int64_t> counts, std::vector<std::string> ae_names,
                   std::vector<std::string> drug_names,
                   std::optional<std::size_t> reference_column = std::nullopt);

  std::size_t rows() const noexcept { return counts_.rows(); }
  std::size_t cols() const noexcept { return counts_.cols(); }

  std::int64_t count(std::size_t i, std::size_t j) const { return counts_(i, j); }
  const Matrix<std::int64_t> &counts() const noexcept { return counts_; }

  const std::vector<std::string> &ae_names() const noexcept { return ae_names_; }
  const std::vector<std::string> &drug_names() const noexcept { return drug_names_; }

  std::size_t reference_column() const noexcept { return reference_; }
  // Columns other than the reference, in table order.
  std::vector<std::size_t> drug_columns() const;

  std::int64_t row_total(std::size_t i) const { return row_totals_[i]; }
  std::int64_t col_total(std::size_t j) const { return col_totals_[j]; }
  std::int64_t grand_total() const noexcept { return grand_total_; }

  ContingencyTable with_reference_column(std::size_t j) const;

private:
  Matrix<std::int64_t> counts_;
  std::vector<std::string> ae_names_;
  std::vector<std::string> drug_names_;
  std::size_t reference_;
  std::vector<std::int64_t> row_totals_;
  std::vector<std::int64_t> col_totals_;
  std::int64_t grand_total_ = 0;
};

// E_ij = n_i. * n_.j / n_..
using ExpectedCounts = Matrix<double>;
ExpectedCounts expected_counts(const ContingencyTable &table);

// Header row "<label>,<drug_1>,...,<drug_J>", then one "<AE>,<count>..." row
// per adverse event. Labels may be double-quoted; counts may not.
ContingencyTable parse_table_csv(std::string_view text);
ContingencyTable read_table_csv(const std::filesystem::path &path);

std::string to_csv(const ContingencyTable &table);
void write_table_csv(const ContingencyTable &table, const std::filesystem::path &path);

// Writes any per-cell matrix using the table's labels: header row of drug
// names, one row per AE.
template <class T>
void write_cell_matrix_csv(std::ostream &out, const ContingencyTable &table,
                           const Matrix<T> &values);

// Splits one CSV record, honouring double quotes around fields.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_escape(std::string_view field);

} // namespace dpsignal

#include "dpsignal/table_io.ipp"
