#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lml {

// One metric cell of an experiment run. seed == -1 marks an aggregate row;
// train_size/k are -1 where the experiment has no such axis.
struct ResultRow {
  std::string experiment;
  long long seed = -1;
  long long train_size = -1;
  long long k = -1;
  std::string method;
  std::string metric;
  double value = 0.0;
  double wall_time_s = 0.0;
};

/// Header is always `experiment,seed,train_size,k,method,metric,value,wall_time_s`.
void write_csv_header(std::ostream& out);

/// Values are written with 17 significant digits (parse back exactly);
/// with no_timing the wall_time_s column is written as 0.
void write_csv_row(std::ostream& out, const ResultRow& row, bool no_timing);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool no_timing);

}  // namespace lml
