#pragma once

#include <iosfwd>
#include <string>

#include "lml/train.hpp"

namespace lml {

/// Versioned text format ("lassomlp-model 1"); values are written with 17
/// significant digits so a save/load round trip reproduces every parameter
/// bit for bit.
void save_lassomlp(const LassoMLPModel& model, std::ostream& out);
void save_lassomlp(const LassoMLPModel& model, const std::string& path);

LassoMLPModel load_lassomlp(std::istream& in);
LassoMLPModel load_lassomlp(const std::string& path);

}  // namespace lml
