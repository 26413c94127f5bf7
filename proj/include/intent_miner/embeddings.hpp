#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace im {

enum class Architecture { CBOW, SkipGram };

std::string architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);

struct TrainingConfig {
    Architecture architecture = Architecture::SkipGram;
    int dim = 100;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double initial_lr = 0.025;
    int min_count = 5;
    std::optional<double> subsample_t;  // frequency threshold; off by default
    std::uint64_t seed = 1;
};

class Vocabulary {
public:
    // Retains words with corpus count >= min_count; index order is count
    // descending, ties lexicographic. Throws when nothing survives.
    static Vocabulary build(const std::vector<std::vector<std::string>>& docs, int min_count);

    int index_of(const std::string& w) const {
        auto it = index_.find(w);
        return it == index_.end() ? -1 : it->second;
    }
    const std::string& word(int i) const { return words_[i]; }
    long long count(int i) const { return counts_[i]; }
    long long total_count() const { return total_; }
    int size() const { return static_cast<int>(words_.size()); }
    int min_count() const { return min_count_; }

    void add_entry(const std::string& w, long long count);  // deserialization path

private:
    std::vector<std::string> words_;
    std::vector<long long> counts_;
    std::unordered_map<std::string, int> index_;
    long long total_ = 0;
    int min_count_ = 1;
};

struct EmbeddingModel {
    Vocabulary vocab;
    std::vector<double> w_in;   // V x dim row-major; the word vectors
    std::vector<double> w_out;  // V x dim; training-internal
    TrainingConfig config;

    int dim() const { return config.dim; }
    std::span<const double> in_row(int i) const {
        return {w_in.data() + static_cast<std::size_t>(i) * config.dim,
                static_cast<std::size_t>(config.dim)};
    }
    std::uint64_t fingerprint() const;
};

struct TrainStats {
    std::vector<double> epoch_mean_loss;
    long long total_pairs = 0;
};

// SGD with negative sampling; deterministic for a fixed seed.
EmbeddingModel train(const std::vector<std::vector<std::string>>& docs,
                     const TrainingConfig& config, TrainStats* stats = nullptr);

// Analytic gradients of the negative-sampling loss for one randomly drawn
// (center, context, negatives) configuration vs central finite differences
// with step epsilon, over every touched parameter. Returns max relative error.
double gradient_check(const TrainingConfig& config,
                      const std::vector<std::vector<std::string>>& tiny_corpus, double epsilon);

// Normalized dot product. Throws ValidationError for zero-norm or
// mismatched-dimension inputs.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// W_in row of an in-vocabulary word; OovError otherwise.
std::span<const double> word_vector(const EmbeddingModel& model, const std::string& word);

struct Neighbor {
    std::string word;
    double score;
};

// Top-k by cosine over W_in rows, query excluded, ties lexicographic.
std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model, const std::string& word,
                                        int k);

// Mean of unit-normalized word vectors; OOV and zero-norm tokens skipped;
// nullopt when nothing remains. Not re-normalized.
std::optional<std::vector<double>> sentence_embedding(const EmbeddingModel& model,
                                                      const std::vector<std::string>& tokens);

std::string serialize_model(const EmbeddingModel& model);
EmbeddingModel parse_model(const std::string& content);
void save_model(const EmbeddingModel& model, const std::string& path);
EmbeddingModel load_model(const std::string& path);

}  // namespace im
