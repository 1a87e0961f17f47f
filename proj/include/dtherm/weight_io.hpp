// Copyright 2026 The dtherm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Weight matrix text format: the dimension d, then d*d whitespace-separated
// row-major entries. Presets "identity2" and "identity3" are accepted by name.

#pragma once

#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "dtherm/bounds.hpp"
#include "dtherm/errors.hpp"

namespace dtherm {

/// Throws InputError on malformed text and DomainError if the parsed matrix is
/// not a valid weight.
inline WeightMatrix parse_weight(std::istream& in, const std::string& origin = "<stream>") {
  long long dim = 0;
  if (!(in >> dim)) throw InputError(origin + ": expected the matrix dimension");
  if (dim != 2 && dim != 3) {
    throw InputError(origin + ": dimension must be 2 or 3, got " + std::to_string(dim));
  }
  RealMatrix m(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) {
      if (!(in >> m(i, j))) {
        throw InputError(origin + ": expected " + std::to_string(dim * dim) + " entries, read " +
                         std::to_string(i * dim + j));
      }
    }
  }
  std::string extra;
  if (in >> extra) throw InputError(origin + ": trailing content '" + extra + "'");
  return WeightMatrix(m);
}

inline WeightMatrix parse_weight(const std::string& text) {
  std::istringstream in(text);
  return parse_weight(in, "<string>");
}

/// Resolves a preset name or reads a file.
inline WeightMatrix load_weight(const std::string& source) {
  if (source == "identity2") return WeightMatrix::identity(2);
  if (source == "identity3") return WeightMatrix::identity(3);
  std::ifstream in(source);
  if (!in) throw InputError("weight '" + source + "' is neither a preset nor a readable file");
  return parse_weight(in, source);
}

}  // namespace dtherm
