#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace botracle {

/// Rapid automatic keyword extraction over short texts (page titles here).
/// Candidate phrases are split at stopwords and punctuation; a word scores
/// degree/frequency on the phrase co-occurrence graph and a phrase scores the
/// sum of its word scores.
struct RakeResult {
    std::map<std::string, double> phrase_scores;
};

const std::set<std::string>& default_stopwords();

RakeResult rake_scores(const std::vector<std::string>& texts,
                       const std::set<std::string>& stopwords);

/// Phrases scoring at or above min_score (the classic cutoff is 1).
std::set<std::string> rake_keywords(const std::vector<std::string>& texts,
                                    const std::set<std::string>& stopwords,
                                    double min_score = 1.0);

}  // namespace botracle
