// dataset.hpp - delimited-text dataset files
//
// Grammar (UTF-8, line oriented):
//   file    := comment* header row+
//   comment := '#' <free text> NEWLINE        (also allowed between rows)
//   header  := colspec (', ' colspec)+ NEWLINE
//   colspec := name '(' unit ')'
//   row     := number (', ' number)+ NEWLINE   (full-precision %.17e)
// Two columns are (abscissa, ordinate); a third is the 1-sigma column.
#pragma once

#include <filesystem>
#include <string>

#include "echo/simulator.hpp"
#include "echo/types.hpp"

namespace echo::io {

/// Serialize a curve (deterministic bytes). Lines in `comments` are written
/// as '#' lines before the header.
std::string curve_to_string(const SweepCurve& curve,
                            const std::vector<std::string>& comments = {});

void write_curve(const std::filesystem::path& path, const SweepCurve& curve,
                 const std::vector<std::string>& comments = {});

/// Parse a dataset; errors carry the 1-based line number.
SweepCurve read_curve_string(const std::string& text,
                             const std::string& origin = "<string>");
SweepCurve read_curve(const std::filesystem::path& path);

/// Echo traces serialize as time/intensity datasets with markers recorded
/// as comments ("# marker: <label> t=<seconds>").
std::string trace_to_string(const sim::EchoTrace& trace,
                            const std::vector<std::string>& comments = {});
void write_trace(const std::filesystem::path& path, const sim::EchoTrace& trace,
                 const std::vector<std::string>& comments = {});

}  // namespace echo::io
