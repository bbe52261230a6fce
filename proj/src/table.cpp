#include "dpsignal/table.hpp"

#include "dpsignal/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace dpsignal {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

void check_labels(const std::vector<std::string> &labels, const char *what) {
  std::unordered_set<std::string> seen;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k].empty())
      throw validation_error(std::string("empty ") + what + " label at position " +
                             std::to_string(k + 1));
    if (!seen.insert(labels[k]).second)
      throw validation_error(std::string("duplicate ") + what + " label '" +
                             labels[k] + "'");
  }
}

} // namespace

ContingencyTable::ContingencyTable(Matrix<std::int64_t> counts,
                                   std::vector<std::string> ae_names,
                                   std::vector<std::string> drug_names,
                                   std::optional<std::size_t> reference_column)
    : counts_(std::move(counts)), ae_names_(std::move(ae_names)),
      drug_names_(std::move(drug_names)) {
  const auto I = counts_.rows(), J = counts_.cols();
  if (I < 2 || J < 2)
    throw validation_error("table must have at least 2 rows and 2 columns, got " +
                           std::to_string(I) + "x" + std::to_string(J));
  if (ae_names_.size() != I || drug_names_.size() != J)
    throw validation_error("label count does not match table dimensions");
  check_labels(ae_names_, "AE");
  check_labels(drug_names_, "drug");

  reference_ = reference_column.value_or(J - 1);
  if (reference_ >= J)
    throw validation_error("reference column index " + std::to_string(reference_) +
                           " out of range");

  row_totals_.assign(I, 0);
  col_totals_.assign(J, 0);
  for (std::size_t i = 0; i < I; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      const auto n = counts_(i, j);
      if (n < 0)
        throw validation_error("negative count " + std::to_string(n) + " at AE '" +
                               ae_names_[i] + "', drug '" + drug_names_[j] + "'");
      row_totals_[i] += n;
      col_totals_[j] += n;
    }
  }
  for (std::size_t i = 0; i < I; ++i)
    if (row_totals_[i] == 0)
      throw validation_error("AE row '" + ae_names_[i] + "' has zero total");
  for (std::size_t j = 0; j < J; ++j)
    if (col_totals_[j] == 0)
      throw validation_error("drug column '" + drug_names_[j] + "' has zero total");
  for (auto t : row_totals_)
    grand_total_ += t;
}

std::vector<std::size_t> ContingencyTable::drug_columns() const {
  std::vector<std::size_t> out;
  out.reserve(cols() - 1);
  for (std::size_t j = 0; j < cols(); ++j)
    if (j != reference_)
      out.push_back(j);
  return out;
}

ContingencyTable ContingencyTable::with_reference_column(std::size_t j) const {
  return ContingencyTable(counts_, ae_names_, drug_names_, j);
}

ExpectedCounts expected_counts(const ContingencyTable &table) {
  ExpectedCounts e(table.rows(), table.cols());
  const double total = static_cast<double>(table.grand_total());
  for (std::size_t i = 0; i < table.rows(); ++i) {
    const double ri = static_cast<double>(table.row_total(i));
    for (std::size_t j = 0; j < table.cols(); ++j)
      e(i, j) = ri * static_cast<double>(table.col_total(j)) / total;
  }
  return e;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.emplace_back(trim(cur));
  return fields;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos)
    return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"')
      out += '"';
    out += c;
  }
  out += '"';
  return out;
}

ContingencyTable parse_table_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos)
      nl = text.size();
    auto line = trim(text.substr(pos, nl - pos));
    if (!line.empty())
      lines.push_back(line);
    pos = nl + 1;
  }
  if (lines.empty())
    throw validation_error("empty table: header row is mandatory");

  auto header = split_csv_line(lines[0]);
  if (header.size() < 2)
    throw validation_error("header must name the AE column and at least one drug");
  std::vector<std::string> drugs(header.begin() + 1, header.end());
  const std::size_t J = drugs.size();
  const std::size_t I = lines.size() - 1;

  Matrix<std::int64_t> counts(I, J);
  std::vector<std::string> aes;
  aes.reserve(I);
  for (std::size_t r = 0; r < I; ++r) {
    auto fields = split_csv_line(lines[r + 1]);
    const auto line_no = std::to_string(r + 2);
    if (fields.size() != J + 1)
      throw validation_error("row " + line_no + " ('" + fields[0] + "') has " +
                             std::to_string(fields.size() - 1) + " counts, expected " +
                             std::to_string(J));
    aes.push_back(fields[0]);
    for (std::size_t j = 0; j < J; ++j) {
      const auto &f = fields[j + 1];
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw validation_error("non-integer count '" + f + "' in row " + line_no +
                               " ('" + fields[0] + "'), column '" + drugs[j] + "'");
      if (v < 0)
        throw validation_error("negative count " + f + " in row " + line_no + " ('" +
                               fields[0] + "'), column '" + drugs[j] + "'");
      counts(r, j) = v;
    }
  }
  return ContingencyTable(std::move(counts), std::move(aes), std::move(drugs));
}

ContingencyTable read_table_csv(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw io_error("cannot open table file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_table_csv(ss.str());
}

std::string to_csv(const ContingencyTable &table) {
  std::ostringstream out;
  write_cell_matrix_csv(out, table, table.counts());
  return out.str();
}

void write_table_csv(const ContingencyTable &table, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw io_error("cannot write '" + path.string() + "'");
  out << to_csv(table);
}

} // namespace dpsignal
