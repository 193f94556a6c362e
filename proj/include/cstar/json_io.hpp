#pragma once

#include <nlohmann/json_fwd.hpp>

#include "cstar/matrix.hpp"

// Canonical JSON encodings. A matrix is
//   {"rows": r, "cols": c, "data": [[re, im], ...]}
// with `data` in row-major order; finite doubles round-trip bit exactly.

namespace cstar {

nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace cstar
