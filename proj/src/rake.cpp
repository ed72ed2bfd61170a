#include "botracle/rake.hpp"

#include <algorithm>
#include <cctype>

namespace botracle {

const std::set<std::string>& default_stopwords() {
    static const std::set<std::string> words = {
        "a",    "an",   "and",  "are", "as",   "at",   "be",   "by",   "for", "from",
        "has",  "have", "how",  "in",  "is",   "it",   "its",  "of",   "on",  "or",
        "our",  "that", "the",  "their", "this", "to",  "was",  "we",   "were", "what",
        "when", "where", "which", "who", "will", "with", "you",  "your"};
    return words;
}

namespace {

std::vector<std::vector<std::string>> candidate_phrases(const std::string& text,
                                                        const std::set<std::string>& stopwords) {
    std::vector<std::vector<std::string>> phrases;
    std::vector<std::string> current;
    std::string word;
    auto flush_word = [&]() {
        if (word.empty()) return;
        if (stopwords.count(word)) {
            if (!current.empty()) phrases.push_back(std::move(current));
            current = {};
        } else {
            current.push_back(word);
        }
        word.clear();
    };
    for (char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else if (raw == '\'') {
            continue;  // keep contractions joined
        } else if (raw == ' ' || raw == '\t') {
            flush_word();
        } else {
            // punctuation ends the phrase
            flush_word();
            if (!current.empty()) phrases.push_back(std::move(current));
            current = {};
        }
    }
    flush_word();
    if (!current.empty()) phrases.push_back(std::move(current));
    return phrases;
}

}  // namespace

RakeResult rake_scores(const std::vector<std::string>& texts,
                       const std::set<std::string>& stopwords) {
    std::vector<std::vector<std::string>> phrases;
    for (const auto& text : texts) {
        auto ps = candidate_phrases(text, stopwords);
        phrases.insert(phrases.end(), std::make_move_iterator(ps.begin()),
                       std::make_move_iterator(ps.end()));
    }

    // degree(w) counts co-occurrences within phrases, self included;
    // freq(w) counts occurrences.
    std::map<std::string, double> degree, freq;
    for (const auto& phrase : phrases) {
        for (const auto& w : phrase) {
            freq[w] += 1.0;
            degree[w] += static_cast<double>(phrase.size());
        }
    }

    RakeResult result;
    for (const auto& phrase : phrases) {
        std::string joined;
        double score = 0.0;
        for (const auto& w : phrase) {
            if (!joined.empty()) joined += ' ';
            joined += w;
            score += degree[w] / freq[w];
        }
        auto [it, inserted] = result.phrase_scores.emplace(joined, score);
        if (!inserted) it->second = std::max(it->second, score);
    }
    return result;
}

std::set<std::string> rake_keywords(const std::vector<std::string>& texts,
                                    const std::set<std::string>& stopwords, double min_score) {
    std::set<std::string> keywords;
    for (const auto& [phrase, score] : rake_scores(texts, stopwords).phrase_scores)
        if (score >= min_score) keywords.insert(phrase);
    return keywords;
}

}  // namespace botracle
