#pragma once

#include <string>
#include <vector>

namespace crm::text {

// Lowercase alphanumeric tokens; everything else is a separator.
std::vector<std::string> tokenize(const std::string& s);

// Whitespace-delimited raw tokens, punctuation preserved.
std::vector<std::string> split_whitespace(const std::string& s);

std::string to_lower(std::string s);
std::string trim(const std::string& s);

// Light suffix-stripping stemmer: sses->ss, ies->i, trailing s/ed/ing dropped
// when enough stem remains. Deterministic, English-only.
std::string stem(const std::string& token);

bool is_stopword(const std::string& lowercase_token);

// Token reads as a number once surrounding punctuation is stripped.
bool is_numeric_token(const std::string& raw_token);

// Membership in the short list of real words the garbage rule could
// otherwise flag (vowel-free or repeat-heavy English words).
bool is_dictionary_word(const std::string& lowercase_token);

// Content words of a phrase: tokenize, drop stopwords, stem, dedupe.
std::vector<std::string> content_terms(const std::string& phrase);

}  // namespace crm::text
