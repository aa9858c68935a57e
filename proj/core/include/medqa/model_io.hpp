#pragma once

#include <iosfwd>
#include <string>

#include "medqa/hbam.hpp"

namespace medqa {

inline constexpr int kModelFormatVersion = 1;

/// A trained encoder plus the sequence length it was trained with.
struct HbamModel {
  HbamParameters params;
  std::size_t max_seq_length = 10;
};

/// JSON document: format tag, version, dims, seed, then every parameter array
/// in declaration order. Doubles are written in shortest round-trip form, so a
/// save/load cycle is bit-exact.
void save_model(const HbamModel& model, std::ostream& out);
HbamModel load_model(std::istream& in);

void save_model_file(const HbamModel& model, const std::string& path);
HbamModel load_model_file(const std::string& path);

}  // namespace medqa
