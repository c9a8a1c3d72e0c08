#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crm/dataset.hpp"  // Finding

namespace crm {

enum class StepTag { VP, CP, IC, OTHER };

std::string to_string(StepTag tag);

struct ReasoningStep {
    StepTag tag = StepTag::OTHER;
    int index = 0;  // from the label (VP2 -> 2); OTHER numbered by occurrence
    std::string text;

    bool operator==(const ReasoningStep&) const = default;
};

struct ReasoningTrace {
    std::vector<ReasoningStep> steps;  // raw-text order
    std::optional<std::string> final_conclusion;
    std::string raw_text;
    std::vector<Finding> warnings;
    bool refusal = false;
    double garbage = 0.0;

    bool has_warning(const std::string& code) const;
};

// Phrase list consulted by refusal detection. Shipped as a plain-text data
// file (one phrase per line, '#' comments) and overridable per run.
class RefusalLexicon {
public:
    static const RefusalLexicon& builtin();
    static RefusalLexicon load(const std::filesystem::path& path);

    const std::vector<std::string>& phrases() const { return phrases_; }
    const std::string& version() const { return version_; }

private:
    std::vector<std::string> phrases_;  // lowercase
    std::string version_;
};

// Total parser for the VP/CP/IC/Final-Conclusion grammar. Never throws on
// content; every anomaly becomes a warning on the trace.
ReasoningTrace parse_trace(const std::string& raw,
                           const RefusalLexicon& lexicon = RefusalLexicon::builtin());

// True when a lexicon phrase starts within the first 200 characters and the
// text carries no VP/CP/IC labels at all.
bool detect_refusal(const std::string& raw,
                    const RefusalLexicon& lexicon = RefusalLexicon::builtin());

// Fraction of whitespace tokens that read as keyboard noise: length >= 6,
// non-numeric, not a known word, and either vowel-free or containing a run of
// 4+ identical characters.
double garbage_score(const std::string& raw);

// Traces with more noise than this get a high-garbage warning.
inline constexpr double kGarbageWarnThreshold = 0.2;

}  // namespace crm
