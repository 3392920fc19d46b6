#pragma once

#include <span>
#include <string>

namespace ninlab {

// Static line-chart renderings of the standard CSV artifacts.
//   trajectories: NIW-norm and loss curves vs step from one or more
//                 trajectory CSVs (linear or MLP schema), overlaid.
//   phases:       phase-scan CSV as shaded label bands with NIW decay times.
//   timescales:   fitted taus vs sigma_eps from a timescale CSV.
enum class FigureKind { trajectories, phases, timescales };

FigureKind figure_kind_from_string(const std::string& s);

// Renders to an SVG string; byte-deterministic for identical inputs.
// Throws FormatError on schema mismatches (naming the missing column) and
// DataError for empty inputs.
std::string render_figure(std::span<const std::string> csv_paths, FigureKind kind);

// render_figure + write; nothing is written when rendering fails.
void emit_figure(std::span<const std::string> csv_paths, FigureKind kind,
                 const std::string& out_svg);

} // namespace ninlab
