#pragma once

#include <optional>
#include <string>
#include <vector>

#include "intent_miner/corpus.hpp"
#include "intent_miner/embeddings.hpp"
#include "intent_miner/preprocess.hpp"

namespace im {

struct IntentUseCase {
    std::string name;
    std::vector<std::string> variations;  // expert-authored paraphrases, >= 1
};

struct IntentDomain {
    std::string name;
    std::vector<IntentUseCase> use_cases;
};

// Declaration order is the tie-break order everywhere downstream.
struct Taxonomy {
    std::vector<IntentDomain> domains;
};

// JSON: {"domains":[{"name":..,"use_cases":[{"name":..,"variations":[..]}]}]}
Taxonomy parse_taxonomy(const std::string& json_text);
Taxonomy load_taxonomy(const std::string& path);
std::string taxonomy_to_json(const Taxonomy& taxonomy);

struct EmbeddedVariation {
    std::string text;
    std::vector<double> vector;  // TopicMapping pipeline then sentence_embedding
};

struct EmbeddedUseCase {
    std::string name;
    std::vector<EmbeddedVariation> variations;
};

struct EmbeddedDomain {
    std::string name;
    std::vector<EmbeddedUseCase> use_cases;
};

struct EmbeddedTaxonomy {
    std::vector<EmbeddedDomain> domains;
    std::uint64_t model_fingerprint = 0;
};

// Every variation must embed; a fully-OOV variation aborts with its text.
EmbeddedTaxonomy embed_taxonomy(const Taxonomy& taxonomy, const EmbeddingModel& model,
                                const Lexicon& lex = Lexicon::builtin());

struct MappingConfig {
    double subject_threshold = 0.75;  // tau_s
    int top_n = 5;
    double min_score = 0.0;
    bool use_subject = true;  // false forces the all-domains branch
};

// Best per-domain score = max over that domain's variation embeddings of
// cosine(subject, variation); argmax domain when its best score >= tau_s.
std::optional<std::string> classify_subject_domain(const std::optional<std::string>& subject,
                                                   const EmbeddedTaxonomy& etx,
                                                   const EmbeddingModel& model, double tau_s,
                                                   const Lexicon& lex = Lexicon::builtin());

// entry (n, k) = cosine(sentence n, variation k)
std::vector<std::vector<double>> score_matrix(const std::vector<std::vector<double>>& sentences,
                                              const EmbeddedUseCase& use_case);

struct RankedIntent {
    std::string domain;
    std::string use_case;
    double score;
    int sentence_index;   // into the ticket's split_sentences order
    int variation_index;  // into the use case's variation list
};

struct IntentRanking {
    std::string ticket_id;
    std::vector<RankedIntent> entries;  // scores non-increasing
    bool subject_narrowed = false;
    bool no_embeddable_sentences = false;
};

IntentRanking rank_intents(const Ticket& ticket, const EmbeddedTaxonomy& etx,
                           const EmbeddingModel& model, const MappingConfig& config,
                           const Lexicon& lex = Lexicon::builtin());

// Order-preserving; per-ticket failures isolated into empty rankings.
std::vector<IntentRanking> rank_intents_batch(const TicketCollection& collection,
                                              const EmbeddedTaxonomy& etx,
                                              const EmbeddingModel& model,
                                              const MappingConfig& config,
                                              const Lexicon& lex = Lexicon::builtin());

// one JSON record per ticket, stable field order
std::string rankings_to_jsonl(const std::vector<IntentRanking>& rankings);

}  // namespace im
