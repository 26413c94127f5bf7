#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "intent_miner/intent.hpp"

namespace im {

struct LabelledExample {
    std::string ticket_id;
    std::string use_case;  // gold label
};

struct LabelledSet {
    std::vector<LabelledExample> examples;
    // order-insensitive hash; reports over the same labels share it
    std::uint64_t fingerprint() const;
};

// labels CSV: header "id,use_case"
LabelledSet parse_labels_csv(const std::string& content);
LabelledSet load_labels(const std::string& path);

struct UseCaseResult {
    std::string use_case;
    int count = 0;
    int correct = 0;      // top-1 exact match
    int topk_hits = 0;    // gold anywhere in the first k entries
    double accuracy() const { return count ? static_cast<double>(correct) / count : 0.0; }
    double topk_rate() const { return count ? static_cast<double>(topk_hits) / count : 0.0; }
};

struct EvalReport {
    std::string model_desc;  // e.g. "skipgram-d100"
    std::uint64_t labels_fingerprint = 0;
    double subject_threshold = 0.0;
    bool use_subject = true;
    int top_k = 3;
    std::vector<UseCaseResult> per_use_case;  // taxonomy declaration order
    int total = 0;
    int total_correct = 0;
    int total_topk = 0;
    double micro_accuracy() const {
        return total ? static_cast<double>(total_correct) / total : 0.0;
    }
};

// A ticket counts as correct iff the top-1 ranked use case equals its gold
// label; empty rankings count as incorrect. Unknown labels or unresolvable
// ids fail validation before any scoring.
EvalReport evaluate(const LabelledSet& labelled, const TicketCollection& collection,
                    const Taxonomy& taxonomy, const EmbeddedTaxonomy& etx,
                    const EmbeddingModel& model, const MappingConfig& config, int top_k = 3,
                    const Lexicon& lex = Lexicon::builtin());

std::string report_to_csv(const EvalReport& report);
EvalReport parse_report_csv(const std::string& content);
EvalReport load_report(const std::string& path);

// Table-like comparison: one row per model config, one column per use case
// plus overall; trailing row of per-use-case ticket counts.
std::string compare_to_csv(const std::vector<EvalReport>& reports);
std::string compare_to_text(const std::vector<EvalReport>& reports);

}  // namespace im
