#pragma once

#include <string>

namespace crm::prompts {

// Pre-substitution template text. These strings are pinned by sha256 golden
// tests; any edit must be deliberate.
const std::string& cot_template();
const std::string& answer_template(bool masked);

// Substitutes the question into the template's single {question} slot.
// A literal "{question}" inside the question text is not re-expanded.
std::string build_cot_prompt(const std::string& question);
std::string build_answer_prompt(const std::string& question, bool masked);

}  // namespace crm::prompts
