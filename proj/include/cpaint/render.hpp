#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "cpaint/diagnostics.hpp"
#include "cpaint/io.hpp"

namespace cpaint {

/// Fixed CP palette (15 distinct colors) and the residual color.
inline constexpr std::array<std::string_view, 15> kPalette = {
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6",
    "#bcf60c", "#fabebe", "#008080", "#e6beff", "#9a6324", "#800000", "#000075"};
inline constexpr std::string_view kResidualColor = "#9e9e9e";

/// Palette entry k (wrapping past 15 with golden-angle hues).
std::string palette_color(std::size_t k);

/// 1 − min(1, log(1+N̄)/log(1+N̄max)); 0 is darkest.
double shading_lightness(double total, double max_total);

std::string render_raw(const CountTable& table);
std::string render_painting(const PaintingMatrix& painting, bool shaded);
std::string render_rcd_overlay(const PaintingMatrix& painting, const CountTable& table,
                               const std::vector<RcdRow>& rcd);
std::string render_dendrogram(const Dendrogram& tree, const std::vector<std::string>& leaf_labels);
std::string render_trace(const TraceSeries& series);
/// Heatmap with rows/columns permuted by `order` (empty = identity).
std::string render_incidence(const IncidenceMatrix& matrix, const std::vector<int>& order);
std::string render_k_histogram(const std::vector<long>& histogram);

}  // namespace cpaint
