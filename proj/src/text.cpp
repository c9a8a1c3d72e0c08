#include "crm/text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace crm::text {

namespace {

inline bool is_alnum(unsigned char c) { return std::isalnum(c) != 0; }

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> kStop = {
        "a",    "an",   "and",  "are",  "as",   "at",    "be",    "been",
        "being", "by",  "for",  "from", "had",  "has",   "have",  "in",
        "into", "is",   "it",   "its",  "of",   "on",    "or",    "that",
        "the",  "their", "there", "this", "to",  "was",   "were",  "which",
        "with", "what", "who",  "whom", "will", "would", "they",  "them",
    };
    return kStop;
}

// Real English words the garbage heuristic could reach (length >= 6 and
// vowel-free, or containing a 4+ run). Tokens outside these shapes never
// consult the dictionary.
const std::unordered_set<std::string>& dictionary() {
    static const std::unordered_set<std::string> kWords = {
        "rhythm", "rhythms", "crypts", "glyphs", "nymphs", "lymphs",
        "sylphs", "tryst",   "trysts", "myrrhs", "syzygy", "flybys",
        "crwths", "psychs",
    };
    return kWords;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : s) {
        if (is_alnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> split_whitespace(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            if (!cur.empty()) {
                out.push_back(std::move(cur));
                cur.clear();
            }
        } else {
            cur.push_back(static_cast<char>(c));
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string stem(const std::string& token) {
    std::string t = to_lower(token);
    auto ends_with = [&](const char* suf) {
        size_t n = std::char_traits<char>::length(suf);
        return t.size() >= n && t.compare(t.size() - n, n, suf) == 0;
    };
    if (ends_with("sses")) {
        t.erase(t.size() - 2);
    } else if (ends_with("ies")) {
        t.erase(t.size() - 2);
    } else if (ends_with("ss")) {
        // glass, class: keep
    } else if (ends_with("s") && t.size() > 3) {
        t.erase(t.size() - 1);
    }
    if (ends_with("ing") && t.size() >= 6) {
        t.erase(t.size() - 3);
    } else if (ends_with("ed") && t.size() >= 5) {
        t.erase(t.size() - 2);
    }
    if (ends_with("y") && t.size() > 3) t.back() = 'i';
    // pouring -> pour, masked -> mask, bottles -> bottle, bodies/body -> bodi
    return t;
}

bool is_stopword(const std::string& lowercase_token) {
    return stopwords().count(lowercase_token) > 0;
}

bool is_numeric_token(const std::string& raw_token) {
    bool saw_digit = false;
    for (unsigned char c : raw_token) {
        if (std::isdigit(c)) {
            saw_digit = true;
        } else if (std::isalpha(c)) {
            return false;
        }
        // punctuation (., %, -, etc.) is tolerated around and inside numbers
    }
    return saw_digit;
}

bool is_dictionary_word(const std::string& lowercase_token) {
    return dictionary().count(lowercase_token) > 0;
}

std::vector<std::string> content_terms(const std::string& phrase) {
    std::vector<std::string> out;
    for (const auto& tok : tokenize(phrase)) {
        if (is_stopword(tok)) continue;
        std::string s = stem(tok);
        if (s.empty()) continue;
        if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    return out;
}

}  // namespace crm::text
