#include "intent_miner/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "intent_miner/errors.hpp"
#include "intent_miner/util.hpp"

namespace im {

namespace {

constexpr std::size_t kNegTableSize = 1000000;
constexpr std::uint64_t kWalkSeedSalt = 0x9e3779b97f4a7c15ull;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<int> build_negative_table(const Vocabulary& vocab) {
    const int v = vocab.size();
    double norm = 0.0;
    for (int i = 0; i < v; ++i) norm += std::pow(static_cast<double>(vocab.count(i)), 0.75);
    std::vector<int> table(kNegTableSize);
    int word = 0;
    double cum = std::pow(static_cast<double>(vocab.count(0)), 0.75) / norm;
    for (std::size_t i = 0; i < kNegTableSize; ++i) {
        table[i] = word;
        if (static_cast<double>(i + 1) / kNegTableSize > cum && word < v - 1) {
            ++word;
            cum += std::pow(static_cast<double>(vocab.count(word)), 0.75) / norm;
        }
    }
    return table;
}

std::vector<std::vector<int>> encode_corpus(const std::vector<std::vector<std::string>>& docs,
                                            const Vocabulary& vocab) {
    std::vector<std::vector<int>> out;
    out.reserve(docs.size());
    for (const auto& doc : docs) {
        std::vector<int> ids;
        for (const auto& w : doc) {
            int idx = vocab.index_of(w);
            if (idx >= 0) ids.push_back(idx);
        }
        out.push_back(std::move(ids));
    }
    return out;
}

// One pass over the corpus reproducing every subsample and dynamic-window
// draw. Used twice with identically seeded RNGs: once to count training
// events for the lr schedule, once for the actual updates.
template <typename CenterFn>
void walk_epoch(const std::vector<std::vector<int>>& corpus, const Vocabulary& vocab,
                const TrainingConfig& cfg, Rng& rng, CenterFn&& fn) {
    for (const auto& doc : corpus) {
        std::vector<int> kept;
        if (cfg.subsample_t) {
            for (int id : doc) {
                double f = static_cast<double>(vocab.count(id)) /
                           static_cast<double>(vocab.total_count());
                double ratio = *cfg.subsample_t / f;
                double keep = std::min(1.0, std::sqrt(ratio) + ratio);
                if (rng.next_double() < keep) kept.push_back(id);
            }
        } else {
            kept = doc;
        }
        const int n = static_cast<int>(kept.size());
        for (int i = 0; i < n; ++i) {
            int b = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.window)));
            int lo = std::max(0, i - b);
            int hi = std::min(n - 1, i + b);
            fn(kept, i, lo, hi);
        }
    }
}

void validate_config(const TrainingConfig& cfg) {
    if (cfg.dim < 1) throw ValidationError("dim must be >= 1");
    if (cfg.window < 1) throw ValidationError("window must be >= 1");
    if (cfg.negatives < 1) throw ValidationError("negatives must be >= 1");
    if (cfg.epochs < 1) throw ValidationError("epochs must be >= 1");
    if (cfg.initial_lr <= 0) throw ValidationError("initial_lr must be > 0");
    if (cfg.min_count < 1) throw ValidationError("min_count must be >= 1");
}

}  // namespace

std::string architecture_name(Architecture a) {
    return a == Architecture::CBOW ? "cbow" : "skipgram";
}

Architecture architecture_from_name(const std::string& name) {
    if (name == "cbow") return Architecture::CBOW;
    if (name == "skipgram") return Architecture::SkipGram;
    throw ValidationError("unknown architecture: " + name + " (expected cbow|skipgram)");
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& docs, int min_count) {
    if (min_count < 1) throw ValidationError("min_count must be >= 1");
    std::unordered_map<std::string, long long> counts;
    for (const auto& doc : docs)
        for (const auto& w : doc) ++counts[w];

    std::vector<std::pair<std::string, long long>> kept;
    for (const auto& [w, c] : counts)
        if (c >= min_count) kept.emplace_back(w, c);
    if (kept.empty()) throw ValidationError("vocabulary empty after min_count filtering");
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    v.min_count_ = min_count;
    for (auto& [w, c] : kept) v.add_entry(w, c);
    return v;
}

void Vocabulary::add_entry(const std::string& w, long long count) {
    index_[w] = static_cast<int>(words_.size());
    words_.push_back(w);
    counts_.push_back(count);
    total_ += count;
}

std::uint64_t EmbeddingModel::fingerprint() const { return fnv1a(serialize_model(*this)); }

EmbeddingModel train(const std::vector<std::vector<std::string>>& docs,
                     const TrainingConfig& cfg, TrainStats* stats) {
    validate_config(cfg);
    EmbeddingModel model;
    model.config = cfg;
    model.vocab = Vocabulary::build(docs, cfg.min_count);
    const int v = model.vocab.size();
    const int dim = cfg.dim;

    auto corpus = encode_corpus(docs, model.vocab);
    auto neg_table = build_negative_table(model.vocab);

    Rng rng(cfg.seed);
    model.w_in.resize(static_cast<std::size_t>(v) * dim);
    model.w_out.assign(static_cast<std::size_t>(v) * dim, 0.0);
    for (auto& x : model.w_in) x = (rng.next_double() - 0.5) / dim;

    // counting pass for the lr schedule: one event per (center, context) pair
    // for skip-gram, one per center with non-empty context for CBOW
    long long total_events = 0;
    {
        Rng count_rng(cfg.seed ^ kWalkSeedSalt);
        for (int e = 0; e < cfg.epochs; ++e) {
            walk_epoch(corpus, model.vocab, cfg, count_rng,
                       [&](const std::vector<int>&, int i, int lo, int hi) {
                           if (cfg.architecture == Architecture::SkipGram)
                               total_events += (hi - lo);  // context excludes the center
                           else if (hi > lo)
                               total_events += 1;
                       });
        }
    }
    if (stats) {
        stats->total_pairs = total_events;
        stats->epoch_mean_loss.clear();
    }
    if (total_events == 0) return model;  // nothing co-occurs; matrices stay at init

    const double min_lr = cfg.initial_lr / 10.0;
    long long done = 0;
    std::vector<double> h(dim), grad_h(dim);

    // one SGD step against one positive target given the current input
    // representation h; returns the event loss and fills grad_h
    auto negative_sampling_step = [&](int positive, double lr) {
        std::fill(grad_h.begin(), grad_h.end(), 0.0);
        double loss = 0.0;
        for (int s = 0; s < cfg.negatives + 1; ++s) {
            int target;
            double label;
            if (s == 0) {
                target = positive;
                label = 1.0;
            } else {
                target = neg_table[rng.next_below(kNegTableSize)];
                int tries = 0;
                while (target == positive && ++tries < 20)
                    target = neg_table[rng.next_below(kNegTableSize)];
                if (target == positive) continue;
                label = 0.0;
            }
            double* u = model.w_out.data() + static_cast<std::size_t>(target) * dim;
            double dot = 0.0;
            for (int j = 0; j < dim; ++j) dot += u[j] * h[j];
            if (!std::isfinite(dot)) return std::numeric_limits<double>::quiet_NaN();
            double f = sigmoid(dot);
            loss += label > 0.5 ? -std::log(std::max(f, 1e-300))
                                : -std::log(std::max(1.0 - f, 1e-300));
            double g = (label - f) * lr;
            for (int j = 0; j < dim; ++j) {
                grad_h[j] += g * u[j];
                u[j] += g * h[j];
            }
        }
        return loss;
    };

    Rng walk_rng(cfg.seed ^ kWalkSeedSalt);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        long long epoch_events = 0;
        walk_epoch(corpus, model.vocab, cfg, walk_rng,
                   [&](const std::vector<int>& sent, int i, int lo, int hi) {
                       const int center = sent[i];
                       if (cfg.architecture == Architecture::SkipGram) {
                           double* vc = model.w_in.data() + static_cast<std::size_t>(center) * dim;
                           for (int p = lo; p <= hi; ++p) {
                               if (p == i) continue;
                               double lr = cfg.initial_lr -
                                           (cfg.initial_lr - min_lr) *
                                               (static_cast<double>(done) / total_events);
                               std::copy(vc, vc + dim, h.begin());
                               double loss = negative_sampling_step(sent[p], lr);
                               if (!std::isfinite(loss))
                                   throw TrainingDivergedError(epoch + 1, done);
                               for (int j = 0; j < dim; ++j) vc[j] += grad_h[j];
                               epoch_loss += loss;
                               ++epoch_events;
                               ++done;
                           }
                       } else {
                           const int m = hi - lo;  // context size
                           if (m <= 0) return;
                           std::fill(h.begin(), h.end(), 0.0);
                           for (int p = lo; p <= hi; ++p) {
                               if (p == i) continue;
                               const double* row =
                                   model.w_in.data() + static_cast<std::size_t>(sent[p]) * dim;
                               for (int j = 0; j < dim; ++j) h[j] += row[j];
                           }
                           for (int j = 0; j < dim; ++j) h[j] /= m;
                           double lr = cfg.initial_lr -
                                       (cfg.initial_lr - min_lr) *
                                           (static_cast<double>(done) / total_events);
                           double loss = negative_sampling_step(center, lr);
                           if (!std::isfinite(loss)) throw TrainingDivergedError(epoch + 1, done);
                           for (int p = lo; p <= hi; ++p) {
                               if (p == i) continue;
                               double* row =
                                   model.w_in.data() + static_cast<std::size_t>(sent[p]) * dim;
                               for (int j = 0; j < dim; ++j) row[j] += grad_h[j] / m;
                           }
                           epoch_loss += loss;
                           ++epoch_events;
                           ++done;
                       }
                   });
        if (stats)
            stats->epoch_mean_loss.push_back(epoch_events ? epoch_loss / epoch_events : 0.0);
    }
    return model;
}

double gradient_check(const TrainingConfig& cfg,
                      const std::vector<std::vector<std::string>>& tiny_corpus, double epsilon) {
    validate_config(cfg);
    Vocabulary vocab = Vocabulary::build(tiny_corpus, cfg.min_count);
    const int v = vocab.size();
    const int dim = cfg.dim;
    if (dim > 16 || v > 20) throw ValidationError("gradient_check is desk-scale: dim<=16, V<=20");

    auto corpus = encode_corpus(tiny_corpus, vocab);
    Rng rng(cfg.seed);

    // both matrices random here: a zero W_out would zero out input gradients
    std::vector<double> w_in(static_cast<std::size_t>(v) * dim), w_out(w_in.size());
    for (auto& x : w_in) x = (rng.next_double() - 0.5) / dim;
    for (auto& x : w_out) x = (rng.next_double() - 0.5) / dim;

    // draw one (center, context, negatives) configuration from a random doc
    std::vector<int> sent;
    for (int tries = 0; tries < 1000 && sent.size() < 2; ++tries)
        sent = corpus[rng.next_below(corpus.size())];
    if (sent.size() < 2) throw ValidationError("gradient_check needs a doc with >= 2 tokens");
    int i = static_cast<int>(rng.next_below(sent.size()));
    int b = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(cfg.window)));
    int lo = std::max(0, i - b);
    int hi = std::min(static_cast<int>(sent.size()) - 1, i + b);
    if (hi == lo) {  // lone token; widen to guarantee a context word
        lo = std::max(0, i - 1);
        hi = std::min(static_cast<int>(sent.size()) - 1, i + 1);
    }

    std::vector<int> input_rows;  // rows of W_in feeding h
    int positive;
    if (cfg.architecture == Architecture::SkipGram) {
        int p = i;
        while (p == i) p = lo + static_cast<int>(rng.next_below(hi - lo + 1));
        input_rows = {sent[i]};
        positive = sent[p];
    } else {
        for (int p = lo; p <= hi; ++p)
            if (p != i) input_rows.push_back(sent[p]);
        positive = sent[i];
    }
    std::vector<int> negatives;
    for (int k = 0; k < cfg.negatives; ++k) {
        int n = static_cast<int>(rng.next_below(v));
        int tries = 0;
        while (n == positive && ++tries < 50) n = static_cast<int>(rng.next_below(v));
        if (n != positive) negatives.push_back(n);
    }

    const int m = static_cast<int>(input_rows.size());
    auto loss_fn = [&]() {
        std::vector<double> h(dim, 0.0);
        for (int row : input_rows)
            for (int j = 0; j < dim; ++j) h[j] += w_in[static_cast<std::size_t>(row) * dim + j];
        for (int j = 0; j < dim; ++j) h[j] /= m;
        auto term = [&](int target, double label) {
            double dot = 0.0;
            for (int j = 0; j < dim; ++j)
                dot += w_out[static_cast<std::size_t>(target) * dim + j] * h[j];
            double f = sigmoid(dot);
            return label > 0.5 ? -std::log(f) : -std::log(1.0 - f);
        };
        double loss = term(positive, 1.0);
        for (int n : negatives) loss += term(n, 0.0);
        return loss;
    };

    // analytic gradients, accumulated per distinct parameter row
    std::vector<double> h(dim, 0.0), grad_h(dim, 0.0);
    for (int row : input_rows)
        for (int j = 0; j < dim; ++j) h[j] += w_in[static_cast<std::size_t>(row) * dim + j];
    for (int j = 0; j < dim; ++j) h[j] /= m;

    std::map<int, std::vector<double>> grad_u;  // W_out row -> gradient
    auto accumulate_target = [&](int target, double label) {
        double dot = 0.0;
        for (int j = 0; j < dim; ++j)
            dot += w_out[static_cast<std::size_t>(target) * dim + j] * h[j];
        double f = sigmoid(dot);
        auto& gu = grad_u[target];
        if (gu.empty()) gu.assign(dim, 0.0);
        for (int j = 0; j < dim; ++j) {
            gu[j] += (f - label) * h[j];
            grad_h[j] += (f - label) * w_out[static_cast<std::size_t>(target) * dim + j];
        }
    };
    accumulate_target(positive, 1.0);
    for (int n : negatives) accumulate_target(n, 0.0);

    std::map<int, std::vector<double>> grad_v;  // W_in row -> gradient
    for (int row : input_rows) {
        auto& gv = grad_v[row];
        if (gv.empty()) gv.assign(dim, 0.0);
        for (int j = 0; j < dim; ++j) gv[j] += grad_h[j] / m;
    }

    auto fd = [&](std::vector<double>& mat, int row, int j) {
        double& p = mat[static_cast<std::size_t>(row) * dim + j];
        double orig = p;
        p = orig + epsilon;
        double up = loss_fn();
        p = orig - epsilon;
        double dn = loss_fn();
        p = orig;
        return (up - dn) / (2.0 * epsilon);
    };

    double max_rel = 0.0;
    auto compare = [&](double analytic, double numeric) {
        double rel = std::abs(analytic - numeric) /
                     std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
        max_rel = std::max(max_rel, rel);
    };
    for (const auto& [row, g] : grad_v)
        for (int j = 0; j < dim; ++j) compare(g[j], fd(w_in, row, j));
    for (const auto& [row, g] : grad_u)
        for (int j = 0; j < dim; ++j) compare(g[j], fd(w_out, row, j));
    return max_rel;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ValidationError("cosine_similarity: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw ValidationError("cosine_similarity undefined for zero-norm vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::span<const double> word_vector(const EmbeddingModel& model, const std::string& word) {
    int idx = model.vocab.index_of(word);
    if (idx < 0) throw OovError(word);
    return model.in_row(idx);
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingModel& model, const std::string& word,
                                        int k) {
    if (k < 1) throw ValidationError("k must be >= 1");
    int q = model.vocab.index_of(word);
    if (q < 0) throw OovError(word);
    auto qv = model.in_row(q);

    std::vector<Neighbor> all;
    for (int i = 0; i < model.vocab.size(); ++i) {
        if (i == q) continue;
        all.push_back({model.vocab.word(i), cosine_similarity(qv, model.in_row(i))});
    }
    std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.word < b.word;
    });
    if (static_cast<int>(all.size()) > k) all.resize(k);
    return all;
}

std::optional<std::vector<double>> sentence_embedding(const EmbeddingModel& model,
                                                      const std::vector<std::string>& tokens) {
    const int dim = model.dim();
    std::vector<double> sum(dim, 0.0);
    int m = 0;
    for (const auto& tok : tokens) {
        int idx = model.vocab.index_of(tok);
        if (idx < 0) continue;
        auto row = model.in_row(idx);
        double norm = 0.0;
        for (double x : row) norm += x * x;
        if (norm == 0.0) continue;
        norm = std::sqrt(norm);
        for (int j = 0; j < dim; ++j) sum[j] += row[j] / norm;
        ++m;
    }
    if (m == 0) return std::nullopt;
    for (double& x : sum) x /= m;
    return sum;
}

std::string serialize_model(const EmbeddingModel& model) {
    const int v = model.vocab.size();
    const int dim = model.dim();
    std::string out = std::to_string(v) + " " + std::to_string(dim) + "\n";
    for (int i = 0; i < v; ++i) {
        out += model.vocab.word(i);
        for (int j = 0; j < dim; ++j)
            out += " " + format_g9(model.w_in[static_cast<std::size_t>(i) * dim + j]);
        out += "\n";
    }
    const auto& c = model.config;
    out += "#config arch=" + architecture_name(c.architecture) + " window=" +
           std::to_string(c.window) + " negatives=" + std::to_string(c.negatives) + " epochs=" +
           std::to_string(c.epochs) + " lr=" + format_g9(c.initial_lr) + " min_count=" +
           std::to_string(c.min_count) + " seed=" + std::to_string(c.seed) + " subsample=" +
           (c.subsample_t ? format_g9(*c.subsample_t) : "off") + "\n";
    out += "#counts\n";
    for (int i = 0; i < v; ++i) out += std::to_string(model.vocab.count(i)) + "\n";
    out += "#wout\n";
    for (int i = 0; i < v; ++i) {
        std::string line;
        for (int j = 0; j < dim; ++j) {
            if (j) line += " ";
            line += format_g9(model.w_out[static_cast<std::size_t>(i) * dim + j]);
        }
        out += line + "\n";
    }
    return out;
}

EmbeddingModel parse_model(const std::string& content) {
    auto lines = split(content, '\n');
    if (lines.empty()) throw ParseError("empty model file", 1);
    auto header = split(trim(lines[0]), ' ');
    long v = 0, dim = 0;
    try {
        if (header.size() != 2) throw std::invalid_argument("header");
        v = std::stol(header[0]);
        dim = std::stol(header[1]);
    } catch (const std::exception&) {
        throw ParseError("model header must be \"V dim\"", 1);
    }
    if (v < 1 || dim < 1) throw ParseError("model header must be \"V dim\" with positives", 1);
    if (static_cast<long>(lines.size()) < v + 1) throw ParseError("model file truncated", lines.size());

    EmbeddingModel model;
    model.config.dim = static_cast<int>(dim);
    model.w_in.resize(static_cast<std::size_t>(v) * dim);
    for (long i = 0; i < v; ++i) {
        long lineno = i + 2;
        auto parts = split(trim(lines[i + 1]), ' ');
        if (static_cast<long>(parts.size()) != dim + 1)
            throw ParseError("expected word + " + std::to_string(dim) + " components", lineno);
        for (long j = 0; j < dim; ++j) {
            try {
                model.w_in[static_cast<std::size_t>(i) * dim + j] = std::stod(parts[j + 1]);
            } catch (const std::exception&) {
                throw ParseError("bad vector component: " + parts[j + 1], lineno);
            }
        }
        model.vocab.add_entry(parts[0], 1);
    }

    // sibling sections: #config, #counts, #wout
    model.w_out.assign(static_cast<std::size_t>(v) * dim, 0.0);
    std::vector<long long> counts;
    for (std::size_t li = static_cast<std::size_t>(v) + 1; li < lines.size(); ++li) {
        std::string line = trim(lines[li]);
        if (line.rfind("#config ", 0) == 0) {
            for (const auto& kv : split(line.substr(8), ' ')) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                try {
                    if (key == "arch") model.config.architecture = architecture_from_name(val);
                    else if (key == "window") model.config.window = std::stoi(val);
                    else if (key == "negatives") model.config.negatives = std::stoi(val);
                    else if (key == "epochs") model.config.epochs = std::stoi(val);
                    else if (key == "lr") model.config.initial_lr = std::stod(val);
                    else if (key == "min_count") model.config.min_count = std::stoi(val);
                    else if (key == "seed") model.config.seed = std::stoull(val);
                    else if (key == "subsample" && val != "off") model.config.subsample_t = std::stod(val);
                } catch (const std::exception&) {
                    throw ParseError("bad config entry: " + kv, static_cast<long>(li + 1));
                }
            }
        } else if (line == "#counts") {
            for (long i = 0; i < v; ++i) {
                ++li;
                if (li >= lines.size()) throw ParseError("counts section truncated", lines.size());
                try {
                    counts.push_back(std::stoll(trim(lines[li])));
                } catch (const std::exception&) {
                    throw ParseError("bad count: " + lines[li], static_cast<long>(li + 1));
                }
            }
        } else if (line == "#wout") {
            for (long i = 0; i < v; ++i) {
                ++li;
                if (li >= lines.size()) throw ParseError("wout section truncated", lines.size());
                auto parts = split(trim(lines[li]), ' ');
                if (static_cast<long>(parts.size()) != dim)
                    throw ParseError("expected " + std::to_string(dim) + " components",
                                     static_cast<long>(li + 1));
                for (long j = 0; j < dim; ++j) {
                    try {
                        model.w_out[static_cast<std::size_t>(i) * dim + j] = std::stod(parts[j]);
                    } catch (const std::exception&) {
                        throw ParseError("bad wout component: " + parts[j],
                                         static_cast<long>(li + 1));
                    }
                }
            }
        }
    }
    if (!counts.empty()) {
        EmbeddingModel rebuilt;
        rebuilt.config = model.config;
        rebuilt.w_in = std::move(model.w_in);
        rebuilt.w_out = std::move(model.w_out);
        for (long i = 0; i < v; ++i) rebuilt.vocab.add_entry(model.vocab.word(i), counts[i]);
        return rebuilt;
    }
    return model;
}

void save_model(const EmbeddingModel& model, const std::string& path) {
    write_file(path, serialize_model(model));
}

EmbeddingModel load_model(const std::string& path) { return parse_model(read_file(path)); }

}  // namespace im
