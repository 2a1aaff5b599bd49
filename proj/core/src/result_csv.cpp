#include "lml/result_csv.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace lml {

void write_csv_header(std::ostream& out) {
  out << "experiment,seed,train_size,k,method,metric,value,wall_time_s\n";
}

void write_csv_row(std::ostream& out, const ResultRow& row, bool no_timing) {
  if (!std::isfinite(row.value)) {
    throw std::runtime_error("result row " + row.experiment + "/" + row.method + "/" +
                             row.metric + " has a non-finite value");
  }
  char value_buf[40];
  std::snprintf(value_buf, sizeof(value_buf), "%.17g", row.value);
  char time_buf[40];
  std::snprintf(time_buf, sizeof(time_buf), "%.6f", no_timing ? 0.0 : row.wall_time_s);
  out << row.experiment << ',' << row.seed << ',' << row.train_size << ',' << row.k << ','
      << row.method << ',' << row.metric << ',' << value_buf << ',' << time_buf << '\n';
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool no_timing) {
  write_csv_header(out);
  for (const ResultRow& row : rows) write_csv_row(out, row, no_timing);
}

}  // namespace lml
