#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace im {

// Sparse bag-of-words over a shared vocabulary (TopicMapping-mode tokens).
struct BowCorpus {
    std::vector<std::string> vocab;                      // index -> word
    std::unordered_map<std::string, int> index;          // word -> index
    std::vector<std::vector<std::pair<int, int>>> docs;  // (word index, count >= 1)

    static BowCorpus build(const std::vector<std::vector<std::string>>& token_docs);

    int v() const { return static_cast<int>(vocab.size()); }
    std::size_t d() const { return docs.size(); }
};

struct LdaModel {
    int num_topics = 0;
    double alpha = 0.1;
    double beta = 0.01;
    std::vector<std::string> vocab;
    std::unordered_map<std::string, int> index;
    std::vector<long long> n_kw;                // K x V topic-word counts
    std::vector<long long> n_k;                 // per-topic totals
    std::vector<std::vector<long long>> n_dk;   // per training doc topic counts
    std::vector<std::vector<int>> assignments;  // z, token-level, training docs
    std::vector<std::vector<int>> doc_tokens;   // expanded training docs (word ids)
    std::uint64_t seed = 0;
    int iterations = 0;

    int v() const { return static_cast<int>(vocab.size()); }
    double phi(int k, int w) const {
        return (n_kw[static_cast<std::size_t>(k) * v() + w] + beta) / (n_k[k] + v() * beta);
    }
    double theta(int d, int k) const {
        long long len = 0;
        for (long long c : n_dk[d]) len += c;
        return (n_dk[d][k] + alpha) / (len + num_topics * alpha);
    }
    int word_index(const std::string& w) const {
        auto it = index.find(w);
        return it == index.end() ? -1 : it->second;
    }
};

// Collapsed Gibbs sampling; deterministic per seed. When loglik_trace is
// given, the training-corpus log-likelihood is recorded after every sweep.
LdaModel fit_lda(const BowCorpus& corpus, int num_topics, double alpha, double beta,
                 int iterations, std::uint64_t seed, std::vector<double>* loglik_trace = nullptr);

// sum over stored training tokens of log sum_k theta_dk phi_kw
double train_log_likelihood(const LdaModel& model);

// Fold-in Gibbs on a document with phi frozen; returns the theta point
// estimate. The document is given as model-vocabulary word ids.
std::vector<double> fold_in_theta(const LdaModel& model, const std::vector<int>& word_ids,
                                  int fold_in_iterations, std::uint64_t seed);

// theta per document obtained by fold-in on the full document, then
// sum log sum_k theta phi over all tokens. OOV words are dropped.
double log_likelihood(const LdaModel& model, const BowCorpus& corpus, int fold_in_iterations = 50,
                      std::uint64_t seed = 0);

struct PerplexityResult {
    double perplexity = 0.0;
    int skipped_docs = 0;  // held-out docs that were fully OOV
};

// Document-completion protocol: alternate tokens split into estimation /
// evaluation halves, fold-in on the estimation half, perplexity
// exp(-LL_eval / N_eval) on the evaluation half.
PerplexityResult perplexity(const LdaModel& model, const BowCorpus& heldout,
                            int fold_in_iterations, std::uint64_t seed);

struct GridRow {
    int num_topics;
    double alpha;
    double beta;
    double train_loglik;
    double heldout_perplexity;
};

struct GridResult {
    std::vector<GridRow> rows;  // sorted by held-out perplexity ascending
    std::size_t best = 0;       // minimal perplexity, ties -> smaller K
};

GridResult grid_search(const BowCorpus& corpus, double split_fraction,
                       const std::vector<int>& k_list, const std::vector<double>& alpha_list,
                       const std::vector<double>& beta_list, int iterations,
                       int fold_in_iterations, std::uint64_t seed);

std::string grid_to_csv(const GridResult& grid);

// words sorted by phi descending, ties lexicographic; at most V entries
std::vector<std::pair<std::string, double>> top_keywords(const LdaModel& model, int topic, int n);

// Fold-in theta for a tokenized document (strings); throws for fully-OOV docs.
std::vector<double> infer_doc_topics(const LdaModel& model, const std::vector<std::string>& tokens,
                                     int fold_in_iterations = 50, std::uint64_t seed = 0);

// One block per topic: id, top keywords with phi, prevalence sum_d theta_dk / D.
std::string topics_report(const LdaModel& model, int n_keywords);

std::string serialize_lda(const LdaModel& model);
LdaModel parse_lda(const std::string& content);
void save_lda(const LdaModel& model, const std::string& path);
LdaModel load_lda(const std::string& path);

}  // namespace im
