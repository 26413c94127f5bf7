#pragma once

#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "intent_miner/corpus.hpp"

namespace im {

// Mined boilerplate lines (disclaimers, system text). Patterns are stored
// normalized; strip_patterns deletes exact line matches.
struct PatternLibrary {
    std::vector<std::string> patterns;
    double min_doc_frequency = 1.0;
};

enum class PipelineMode {
    Embedding,     // no stopword removal, no lemmatization
    TopicMapping,  // stopwords removed, lemmatized, sentence-split
};

// Bundled stopword list and lemma exception table, loaded from plain-text
// data files (one entry per line; exception lines are "form lemma").
class Lexicon {
public:
    static Lexicon load(const std::string& data_dir);
    // Loaded once from the compiled-in data directory (INTENT_MINER_DATA_DIR,
    // overridable via the INTENT_MINER_DATA environment variable).
    static const Lexicon& builtin();

    bool is_stopword(const std::string& w) const { return stopwords_.count(w) > 0; }
    // empty string when the word has no irregular form
    std::string lemma_exception(const std::string& w) const;
    std::size_t stopword_count() const { return stopwords_.size(); }

private:
    std::unordered_set<std::string> stopwords_;
    std::unordered_map<std::string, std::string> exceptions_;
};

// Lowercase; URLs, markup tags and email addresses removed; non-ASCII
// stripped; whitespace runs collapsed (newlines preserved as line breaks);
// whitespace-delimited chunks longer than 30 characters dropped. Idempotent.
std::string normalize(const std::string& raw);

// Every normalized body line with >= 4 tokens whose document frequency over
// the collection is >= min_doc_frequency, sorted by frequency descending then
// lexicographic.
PatternLibrary mine_patterns(const TicketCollection& collection, double min_doc_frequency);

// Deletes lines equal to a library pattern; text must already be normalized.
std::string strip_patterns(const std::string& text, const PatternLibrary& lib);

// Maximal alphanumeric runs, order preserved.
std::vector<std::string> tokenize(const std::string& text);

// Split on . ? ! ; or newline; fragments trimmed, empties dropped.
std::vector<std::string> split_sentences(const std::string& text);

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const Lexicon& lex);

std::string lemmatize_word(const std::string& word, const Lexicon& lex);
std::vector<std::string> lemmatize(const std::vector<std::string>& tokens, const Lexicon& lex);

// Pattern library file: one normalized line-pattern per line, '#' comments.
PatternLibrary load_pattern_library(const std::string& path);
void save_pattern_library(const PatternLibrary& lib, const std::string& path);

struct ProcessedTicket {
    // flat token stream (both modes)
    std::vector<std::string> tokens;
    // per-sentence tokens; populated in TopicMapping mode only
    std::vector<std::vector<std::string>> sentences;
};

// normalize -> strip_patterns -> (split_sentences) -> tokenize
// -> (remove_stopwords -> lemmatize). Ticket text is subject line (when
// present) followed by the body.
ProcessedTicket run_pipeline(const Ticket& ticket, PipelineMode mode, const PatternLibrary& lib,
                             const Lexicon& lex = Lexicon::builtin());

// TopicMapping treatment of a free-standing phrase (taxonomy variations,
// ticket subjects, single sentences).
std::vector<std::string> topic_tokens(const std::string& text,
                                      const Lexicon& lex = Lexicon::builtin());

}  // namespace im
