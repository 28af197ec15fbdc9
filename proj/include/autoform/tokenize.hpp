#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace autoform {

/// Shared tokenizer for retrieval and token-level metrics.
///
/// Tokens are lowercased. Isabelle symbol tokens (\<in>, \<Union>, ...) and
/// LaTeX commands (\bigcup) stay atomic; remaining text splits on whitespace
/// and punctuation. Quotes, underscores and brackets act as separators.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace autoform
