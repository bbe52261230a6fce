#pragma once

#include <iomanip>
#include <ostream>
#include <type_traits>

namespace dpsignal {

template <class T>
void write_cell_matrix_csv(std::ostream &out, const ContingencyTable &table,
                           const Matrix<T> &values) {
  out << "AE";
  for (const auto &d : table.drug_names())
    out << ',' << csv_escape(d);
  out << '\n';
  if constexpr (std::is_floating_point_v<T>)
    out << std::setprecision(17);
  for (std::size_t i = 0; i < values.rows(); ++i) {
    out << csv_escape(table.ae_names()[i]);
    for (std::size_t j = 0; j < values.cols(); ++j) {
      if constexpr (sizeof(T) == 1)
        out << ',' << static_cast<int>(values(i, j));
      else
        out << ',' << values(i, j);
    }
    out << '\n';
  }
}

} // namespace dpsignal
