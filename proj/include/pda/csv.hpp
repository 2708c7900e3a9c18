#pragma once

#include <string>

#include "pda/types.hpp"

namespace pda {

/// Reads a comma-separated numeric matrix. An optional single header line is
/// auto-detected (first line with a non-numeric cell). Rejects ragged rows,
/// non-numeric cells outside the header, non-finite values, and empty files.
/// Accepts LF or CRLF line endings.
SampleSet load_samples(const std::string& path);

/// Writes the matrix as bare numeric CSV rows at 17 significant digits
/// (round-trip safe), LF line endings.
void write_csv(const std::string& path, const Matrix& m);

}  // namespace pda
