#pragma once

#include <string>

namespace edgerec {

/// Renders an aggregate CSV (level,episode,mean_smoothed,std_smoothed) as an
/// SVG learning-curve figure: one curve per unreliability level with a +-1
/// standard-deviation band, axes labeled episode/return. Throws on a schema
/// mismatch or when the CSV has no data rows, without creating the output.
void emit_plot(const std::string& aggregate_csv_path, const std::string& svg_path);

}  // namespace edgerec
