#include "crm/trace.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "crm/error.hpp"
#include "crm/text.hpp"

namespace crm {

std::string to_string(StepTag tag) {
    switch (tag) {
        case StepTag::VP: return "VP";
        case StepTag::CP: return "CP";
        case StepTag::IC: return "IC";
        case StepTag::OTHER: return "OTHER";
    }
    return "OTHER";
}

bool ReasoningTrace::has_warning(const std::string& code) const {
    return std::any_of(warnings.begin(), warnings.end(),
                       [&](const Finding& f) { return f.code == code; });
}

namespace {

const char* kBuiltinLexicon =
    "# refusal lexicon v1\n"
    "i can't\n"
    "i cant\n"
    "i cannot\n"
    "i am unable\n"
    "i'm unable\n"
    "unable to determine\n"
    "unable to see\n"
    "unable to identify\n"
    "cannot determine\n"
    "cannot see\n"
    "cannot identify\n"
    "can't determine\n"
    "can't see\n"
    "not able to determine\n"
    "not able to see\n"
    "no way to determine\n"
    "not possible to determine\n"
    "impossible to determine\n"
    "i apologize, but\n"
    "i'm sorry, but i\n"
    "as an ai\n"
    "the masked region prevents\n"
    "without seeing the\n";

struct LineView {
    size_t begin = 0;
    size_t end = 0;  // exclusive, excludes the newline
};

std::vector<LineView> split_lines(const std::string& s) {
    std::vector<LineView> lines;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            size_t end = i;
            if (end > start && s[end - 1] == '\r') --end;
            lines.push_back({start, end});
            start = i + 1;
        }
    }
    return lines;
}

// Consumes an optional bullet ('-', '*', or a UTF-8 bullet dot) plus spaces.
size_t skip_bullet(const std::string& s, size_t pos, size_t end) {
    while (pos < end && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos < end && (s[pos] == '-' || s[pos] == '*')) {
        ++pos;
    } else if (pos + 2 < end && static_cast<unsigned char>(s[pos]) == 0xe2 &&
               static_cast<unsigned char>(s[pos + 1]) == 0x80 &&
               static_cast<unsigned char>(s[pos + 2]) == 0xa2) {
        pos += 3;  // "•"
    }
    while (pos < end && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return pos;
}

struct LabelMatch {
    StepTag tag;
    int index;
    std::string text;
};

std::optional<LabelMatch> match_step_label(const std::string& s, LineView line) {
    size_t pos = skip_bullet(s, line.begin, line.end);
    if (pos + 1 >= line.end) return std::nullopt;
    char a = static_cast<char>(std::tolower(static_cast<unsigned char>(s[pos])));
    char b = static_cast<char>(std::tolower(static_cast<unsigned char>(s[pos + 1])));
    StepTag tag;
    if (a == 'v' && b == 'p') tag = StepTag::VP;
    else if (a == 'c' && b == 'p') tag = StepTag::CP;
    else if (a == 'i' && b == 'c') tag = StepTag::IC;
    else return std::nullopt;
    pos += 2;
    while (pos < line.end && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    size_t digits_begin = pos;
    long long index = 0;
    while (pos < line.end && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        if (index < 1000000000LL) index = index * 10 + (s[pos] - '0');
        ++pos;
    }
    if (pos == digits_begin) return std::nullopt;  // label requires digits
    while (pos < line.end && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos >= line.end || s[pos] != ':') return std::nullopt;
    ++pos;
    return LabelMatch{tag, static_cast<int>(index),
                      text::trim(s.substr(pos, line.end - pos))};
}

std::optional<std::string> match_final_conclusion(const std::string& s, LineView line) {
    size_t pos = skip_bullet(s, line.begin, line.end);
    static const std::string kFinal = "final";
    static const std::string kConclusion = "conclusion";
    auto matches_word = [&](const std::string& word) {
        if (line.end - pos < word.size()) return false;
        for (size_t i = 0; i < word.size(); ++i) {
            if (std::tolower(static_cast<unsigned char>(s[pos + i])) != word[i])
                return false;
        }
        pos += word.size();
        return true;
    };
    if (!matches_word(kFinal)) return std::nullopt;
    size_t ws = pos;
    while (pos < line.end && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos == ws) return std::nullopt;  // require whitespace between words
    if (!matches_word(kConclusion)) return std::nullopt;
    while (pos < line.end && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos >= line.end || s[pos] != ':') return std::nullopt;
    ++pos;
    return text::trim(s.substr(pos, line.end - pos));
}

bool contains_step_label(const std::string& s) {
    for (LineView line : split_lines(s)) {
        if (match_step_label(s, line)) return true;
    }
    return false;
}

}  // namespace

const RefusalLexicon& RefusalLexicon::builtin() {
    static const RefusalLexicon lex = [] {
        RefusalLexicon l;
        l.version_ = "builtin-v1";
        std::string content = kBuiltinLexicon;
        for (LineView line : split_lines(content)) {
            std::string phrase = text::trim(content.substr(line.begin, line.end - line.begin));
            if (phrase.empty() || phrase[0] == '#') continue;
            l.phrases_.push_back(text::to_lower(phrase));
        }
        return l;
    }();
    return lex;
}

RefusalLexicon RefusalLexicon::load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("file-not-found", path.string());
    RefusalLexicon l;
    l.version_ = "file:" + path.filename().string();
    std::string line;
    while (std::getline(f, line)) {
        std::string phrase = text::trim(line);
        if (phrase.empty() || phrase[0] == '#') continue;
        l.phrases_.push_back(text::to_lower(phrase));
    }
    return l;
}

bool detect_refusal(const std::string& raw, const RefusalLexicon& lexicon) {
    if (raw.empty()) return false;
    std::string lower = text::to_lower(raw);
    bool phrase_hit = false;
    for (const auto& phrase : lexicon.phrases()) {
        size_t pos = lower.find(phrase);
        if (pos != std::string::npos && pos < 200) {
            phrase_hit = true;
            break;
        }
    }
    if (!phrase_hit) return false;
    return !contains_step_label(raw);
}

double garbage_score(const std::string& raw) {
    auto tokens = text::split_whitespace(raw);
    if (tokens.empty()) return 0.0;
    size_t garbage = 0;
    for (const auto& tok : tokens) {
        // strip surrounding punctuation before judging the core
        size_t b = 0, e = tok.size();
        while (b < e && !std::isalnum(static_cast<unsigned char>(tok[b]))) ++b;
        while (e > b && !std::isalnum(static_cast<unsigned char>(tok[e - 1]))) --e;
        std::string core = tok.substr(b, e - b);
        if (core.size() < 6) continue;
        if (text::is_numeric_token(core)) continue;
        std::string lower = text::to_lower(core);
        if (text::is_dictionary_word(lower)) continue;
        bool has_vowel = lower.find_first_of("aeiou") != std::string::npos;
        size_t max_run = 1, run = 1;
        for (size_t i = 1; i < lower.size(); ++i) {
            run = lower[i] == lower[i - 1] ? run + 1 : 1;
            max_run = std::max(max_run, run);
        }
        if (!has_vowel || max_run >= 4) ++garbage;
    }
    return static_cast<double>(garbage) / static_cast<double>(tokens.size());
}

ReasoningTrace parse_trace(const std::string& raw, const RefusalLexicon& lexicon) {
    ReasoningTrace trace;
    trace.raw_text = raw;
    trace.garbage = garbage_score(raw);
    trace.refusal = detect_refusal(raw, lexicon);

    if (text::trim(raw).empty()) {
        trace.warnings.push_back({"empty-output", "model returned no text"});
        return trace;
    }

    int other_count = 0;
    bool saw_final = false;
    // Sink for unlabeled continuation lines: last step, or the final
    // conclusion once seen.
    enum class Sink { None, Step, Final };
    Sink sink = Sink::None;
    std::string leading_paragraph;

    auto flush_leading = [&] {
        std::string para = text::trim(leading_paragraph);
        leading_paragraph.clear();
        if (para.empty()) return;
        trace.steps.push_back({StepTag::OTHER, ++other_count, para});
    };

    for (LineView line : split_lines(raw)) {
        std::string content = text::trim(raw.substr(line.begin, line.end - line.begin));
        if (auto label = match_step_label(raw, line)) {
            flush_leading();
            trace.steps.push_back({label->tag, label->index, label->text});
            sink = Sink::Step;
            continue;
        }
        if (auto final_text = match_final_conclusion(raw, line)) {
            flush_leading();
            if (saw_final) {
                trace.warnings.push_back(
                    {"duplicate-final", "additional Final Conclusion line ignored"});
            } else {
                trace.final_conclusion = *final_text;
                saw_final = true;
                sink = Sink::Final;
            }
            continue;
        }
        if (content.empty()) {
            // Blank lines only delimit leading prose paragraphs; inside the
            // labeled body continuations keep folding across them.
            if (sink == Sink::None) flush_leading();
            continue;
        }
        switch (sink) {
            case Sink::None:
                if (!leading_paragraph.empty()) leading_paragraph += " ";
                leading_paragraph += content;
                break;
            case Sink::Step: {
                std::string& dst = trace.steps.back().text;
                if (!dst.empty()) dst += " ";
                dst += content;
                break;
            }
            case Sink::Final: {
                std::string& dst = *trace.final_conclusion;
                if (!dst.empty()) dst += " ";
                dst += content;
                break;
            }
        }
    }
    flush_leading();

    // A label line with no text and no continuation carries no content.
    auto removed = std::erase_if(trace.steps,
                                 [](const ReasoningStep& s) { return s.text.empty(); });
    if (removed > 0)
        trace.warnings.push_back({"empty-step", std::to_string(removed) +
                                                    " labeled step(s) had no text"});
    if (!saw_final)
        trace.warnings.push_back({"missing-final", "no Final Conclusion line found"});
    if (trace.garbage > kGarbageWarnThreshold)
        trace.warnings.push_back({"high-garbage", "garbage token fraction " +
                                                      std::to_string(trace.garbage)});
    return trace;
}

}  // namespace crm
