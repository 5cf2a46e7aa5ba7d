#pragma once

#include <string>

#include "tabgbm/explain.hpp"

namespace tabgbm {

/// Horizontal bar chart of mean-abs Shapley importance, one bar per feature
/// in ranking order. Output bytes depend only on the report.
std::string render_importance_svg(const ImportanceReport& report);

/// Line plot of the centered effect curve over its edges.
std::string render_ale_svg(const AleCurve& curve, const std::string& response_name);

/// Two-bar rendering of a binary effect.
std::string render_ale_svg(const BinaryAleEffect& effect, const std::string& response_name);

}  // namespace tabgbm
