#pragma once

#include <string>
#include <vector>

namespace nldst {

using Token = std::string;

// Lowercases, splits punctuation into separate tokens and collapses
// whitespace. ':' between digits is kept so times like "07:00" survive as
// one token. Deterministic; empty input yields an empty list.
std::vector<Token> tokenize(const std::string& raw);

// Joins tokens with single spaces (inverse-ish of tokenize for display).
std::string join_tokens(const std::vector<Token>& tokens);

// Parses common time surfaces ("7am", "7:05 pm", "07:00", "noon",
// "midnight") into zero-padded 24-hour "HH:MM". Returns empty string when
// the surface is not a recognized time pattern.
std::string normalize_time(const std::string& surface);

}  // namespace nldst
