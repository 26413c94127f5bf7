#include "intent_miner/topics.hpp"

#include <algorithm>
#include <cmath>

#include "intent_miner/errors.hpp"
#include "intent_miner/util.hpp"

namespace im {

namespace {

// expand sparse (word,count) doc to a flat token list, index order
std::vector<int> expand_doc(const std::vector<std::pair<int, int>>& doc) {
    std::vector<int> out;
    for (const auto& [w, c] : doc)
        for (int i = 0; i < c; ++i) out.push_back(w);
    return out;
}

int sample_topic(const std::vector<double>& weights, double u) {
    double total = 0.0;
    for (double w : weights) total += w;
    double target = u * total;
    double cum = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        cum += weights[k];
        if (cum >= target) return static_cast<int>(k);
    }
    return static_cast<int>(weights.size()) - 1;
}

// map a corpus doc into model word ids, dropping OOV
std::vector<int> encode_against_model(const LdaModel& model, const BowCorpus& corpus,
                                      const std::vector<std::pair<int, int>>& doc) {
    std::vector<int> out;
    for (const auto& [w, c] : doc) {
        int id = model.word_index(corpus.vocab[w]);
        if (id < 0) continue;
        for (int i = 0; i < c; ++i) out.push_back(id);
    }
    return out;
}

}  // namespace

BowCorpus BowCorpus::build(const std::vector<std::vector<std::string>>& token_docs) {
    BowCorpus corpus;
    for (const auto& doc : token_docs) {
        std::unordered_map<int, int> counts;
        std::vector<int> order;
        for (const auto& tok : doc) {
            auto it = corpus.index.find(tok);
            int id;
            if (it == corpus.index.end()) {
                id = static_cast<int>(corpus.vocab.size());
                corpus.index[tok] = id;
                corpus.vocab.push_back(tok);
            } else {
                id = it->second;
            }
            if (counts.find(id) == counts.end()) order.push_back(id);
            ++counts[id];
        }
        std::sort(order.begin(), order.end());
        std::vector<std::pair<int, int>> sparse;
        for (int id : order) sparse.emplace_back(id, counts[id]);
        corpus.docs.push_back(std::move(sparse));
    }
    return corpus;
}

LdaModel fit_lda(const BowCorpus& corpus, int num_topics, double alpha, double beta,
                 int iterations, std::uint64_t seed, std::vector<double>* loglik_trace) {
    if (corpus.docs.empty()) throw ValidationError("fit_lda: empty corpus");
    if (num_topics < 1) throw ValidationError("fit_lda: K must be >= 1");
    if (alpha <= 0.0 || beta <= 0.0) throw ValidationError("fit_lda: alpha, beta must be > 0");
    if (iterations < 1) throw ValidationError("fit_lda: iterations must be >= 1");

    LdaModel m;
    m.num_topics = num_topics;
    m.alpha = alpha;
    m.beta = beta;
    m.vocab = corpus.vocab;
    m.index = corpus.index;
    m.seed = seed;
    m.iterations = iterations;

    const int v = m.v();
    const int k_count = num_topics;
    m.n_kw.assign(static_cast<std::size_t>(k_count) * v, 0);
    m.n_k.assign(k_count, 0);

    Rng rng(seed);
    for (const auto& doc : corpus.docs) {
        auto tokens = expand_doc(doc);
        std::vector<int> z(tokens.size());
        std::vector<long long> dk(k_count, 0);
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            int k = static_cast<int>(rng.next_below(k_count));
            z[t] = k;
            ++m.n_kw[static_cast<std::size_t>(k) * v + tokens[t]];
            ++m.n_k[k];
            ++dk[k];
        }
        m.doc_tokens.push_back(std::move(tokens));
        m.assignments.push_back(std::move(z));
        m.n_dk.push_back(std::move(dk));
    }

    std::vector<double> weights(k_count);
    const double v_beta = v * beta;
    for (int sweep = 0; sweep < iterations; ++sweep) {
        for (std::size_t d = 0; d < m.doc_tokens.size(); ++d) {
            auto& z = m.assignments[d];
            auto& dk = m.n_dk[d];
            const auto& tokens = m.doc_tokens[d];
            for (std::size_t t = 0; t < tokens.size(); ++t) {
                const int w = tokens[t];
                const int old_k = z[t];
                --m.n_kw[static_cast<std::size_t>(old_k) * v + w];
                --m.n_k[old_k];
                --dk[old_k];
                for (int k = 0; k < k_count; ++k) {
                    weights[k] = (dk[k] + alpha) *
                                 (m.n_kw[static_cast<std::size_t>(k) * v + w] + beta) /
                                 (m.n_k[k] + v_beta);
                }
                const int new_k = sample_topic(weights, rng.next_double());
                z[t] = new_k;
                ++m.n_kw[static_cast<std::size_t>(new_k) * v + w];
                ++m.n_k[new_k];
                ++dk[new_k];
            }
        }
        if (loglik_trace) loglik_trace->push_back(train_log_likelihood(m));
    }
    return m;
}

double train_log_likelihood(const LdaModel& model) {
    double ll = 0.0;
    for (std::size_t d = 0; d < model.doc_tokens.size(); ++d) {
        for (int w : model.doc_tokens[d]) {
            double p = 0.0;
            for (int k = 0; k < model.num_topics; ++k)
                p += model.theta(static_cast<int>(d), k) * model.phi(k, w);
            ll += std::log(p);
        }
    }
    return ll;
}

std::vector<double> fold_in_theta(const LdaModel& model, const std::vector<int>& word_ids,
                                  int fold_in_iterations, std::uint64_t seed) {
    const int k_count = model.num_topics;
    std::vector<long long> dk(k_count, 0);
    if (word_ids.empty()) {
        // prior only
        std::vector<double> theta(k_count, 1.0 / k_count);
        return theta;
    }
    Rng rng(seed);
    std::vector<int> z(word_ids.size());
    for (std::size_t t = 0; t < word_ids.size(); ++t) {
        z[t] = static_cast<int>(rng.next_below(k_count));
        ++dk[z[t]];
    }
    std::vector<double> weights(k_count);
    for (int sweep = 0; sweep < fold_in_iterations; ++sweep) {
        for (std::size_t t = 0; t < word_ids.size(); ++t) {
            const int w = word_ids[t];
            --dk[z[t]];
            for (int k = 0; k < k_count; ++k)
                weights[k] = (dk[k] + model.alpha) * model.phi(k, w);
            z[t] = sample_topic(weights, rng.next_double());
            ++dk[z[t]];
        }
    }
    std::vector<double> theta(k_count);
    const double denom = static_cast<double>(word_ids.size()) + k_count * model.alpha;
    for (int k = 0; k < k_count; ++k) theta[k] = (dk[k] + model.alpha) / denom;
    return theta;
}

double log_likelihood(const LdaModel& model, const BowCorpus& corpus, int fold_in_iterations,
                      std::uint64_t seed) {
    double ll = 0.0;
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
        auto ids = encode_against_model(model, corpus, corpus.docs[d]);
        if (ids.empty()) continue;
        auto theta = fold_in_theta(model, ids, fold_in_iterations, seed + d);
        for (int w : ids) {
            double p = 0.0;
            for (int k = 0; k < model.num_topics; ++k) p += theta[k] * model.phi(k, w);
            ll += std::log(p);
        }
    }
    return ll;
}

PerplexityResult perplexity(const LdaModel& model, const BowCorpus& heldout,
                            int fold_in_iterations, std::uint64_t seed) {
    if (heldout.docs.empty()) throw ValidationError("perplexity: empty held-out corpus");
    double ll = 0.0;
    long long n_eval = 0;
    PerplexityResult result;
    for (std::size_t d = 0; d < heldout.docs.size(); ++d) {
        auto ids = encode_against_model(model, heldout, heldout.docs[d]);
        if (ids.empty()) {
            ++result.skipped_docs;
            continue;
        }
        std::vector<int> estimation, evaluation;
        for (std::size_t t = 0; t < ids.size(); ++t)
            (t % 2 == 0 ? estimation : evaluation).push_back(ids[t]);
        if (evaluation.empty()) continue;  // 1-token doc: nothing to score
        auto theta = fold_in_theta(model, estimation, fold_in_iterations, seed + d);
        for (int w : evaluation) {
            double p = 0.0;
            for (int k = 0; k < model.num_topics; ++k) p += theta[k] * model.phi(k, w);
            ll += std::log(p);
            ++n_eval;
        }
    }
    if (n_eval == 0) throw ValidationError("perplexity: no evaluable held-out tokens");
    result.perplexity = std::exp(-ll / static_cast<double>(n_eval));
    return result;
}

GridResult grid_search(const BowCorpus& corpus, double split_fraction,
                       const std::vector<int>& k_list, const std::vector<double>& alpha_list,
                       const std::vector<double>& beta_list, int iterations,
                       int fold_in_iterations, std::uint64_t seed) {
    if (k_list.empty() || alpha_list.empty() || beta_list.empty())
        throw ValidationError("grid_search: parameter lists must be non-empty");
    if (split_fraction <= 0.0 || split_fraction >= 1.0)
        throw ValidationError("grid_search: split_fraction must be in (0,1)");
    const std::size_t n = corpus.docs.size();
    if (n < 2) throw ValidationError("grid_search: need at least 2 documents");

    // single deterministic split: seeded shuffle, first fraction held out
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.next_below(i + 1)]);
    std::size_t n_val = std::max<std::size_t>(1, static_cast<std::size_t>(split_fraction * n));
    if (n_val >= n) n_val = n - 1;

    BowCorpus train_corpus, val_corpus;
    train_corpus.vocab = val_corpus.vocab = corpus.vocab;
    train_corpus.index = val_corpus.index = corpus.index;
    for (std::size_t i = 0; i < n; ++i)
        (i < n_val ? val_corpus : train_corpus).docs.push_back(corpus.docs[order[i]]);

    GridResult grid;
    for (int k : k_list) {
        for (double alpha : alpha_list) {
            for (double beta : beta_list) {
                LdaModel m = fit_lda(train_corpus, k, alpha, beta, iterations, seed);
                GridRow row;
                row.num_topics = k;
                row.alpha = alpha;
                row.beta = beta;
                row.train_loglik = train_log_likelihood(m);
                row.heldout_perplexity =
                    perplexity(m, val_corpus, fold_in_iterations, seed).perplexity;
                grid.rows.push_back(row);
            }
        }
    }
    std::sort(grid.rows.begin(), grid.rows.end(), [](const GridRow& a, const GridRow& b) {
        if (a.heldout_perplexity != b.heldout_perplexity)
            return a.heldout_perplexity < b.heldout_perplexity;
        if (a.num_topics != b.num_topics) return a.num_topics < b.num_topics;
        if (a.alpha != b.alpha) return a.alpha < b.alpha;
        return a.beta < b.beta;
    });
    grid.best = 0;
    return grid;
}

std::string grid_to_csv(const GridResult& grid) {
    std::string out = "K,alpha,beta,loglik,perplexity,best\n";
    for (std::size_t i = 0; i < grid.rows.size(); ++i) {
        const auto& r = grid.rows[i];
        out += std::to_string(r.num_topics) + "," + format_g9(r.alpha) + "," + format_g9(r.beta) +
               "," + format_g9(r.train_loglik) + "," + format_g9(r.heldout_perplexity) + "," +
               (i == grid.best ? "1" : "0") + "\n";
    }
    return out;
}

std::vector<std::pair<std::string, double>> top_keywords(const LdaModel& model, int topic, int n) {
    if (topic < 0 || topic >= model.num_topics)
        throw ValidationError("top_keywords: topic index out of range");
    if (n < 1) throw ValidationError("top_keywords: n must be >= 1");
    std::vector<std::pair<std::string, double>> all;
    for (int w = 0; w < model.v(); ++w) all.emplace_back(model.vocab[w], model.phi(topic, w));
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(all.size()) > n) all.resize(n);
    return all;
}

std::vector<double> infer_doc_topics(const LdaModel& model, const std::vector<std::string>& tokens,
                                     int fold_in_iterations, std::uint64_t seed) {
    std::vector<int> ids;
    for (const auto& t : tokens) {
        int id = model.word_index(t);
        if (id >= 0) ids.push_back(id);
    }
    if (ids.empty())
        throw ValidationError("infer_doc_topics: document fully out of vocabulary");
    return fold_in_theta(model, ids, fold_in_iterations, seed);
}

std::string topics_report(const LdaModel& model, int n_keywords) {
    const std::size_t d = model.n_dk.size();
    std::vector<double> prevalence(model.num_topics, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (int k = 0; k < model.num_topics; ++k)
            prevalence[k] += model.theta(static_cast<int>(i), k);
    for (double& p : prevalence) p /= d ? static_cast<double>(d) : 1.0;

    std::string out;
    out += "topics: " + std::to_string(model.num_topics) + "  alpha=" + format_g9(model.alpha) +
           "  beta=" + format_g9(model.beta) + "  docs=" + std::to_string(d) + "\n\n";
    for (int k = 0; k < model.num_topics; ++k) {
        out += "topic " + std::to_string(k) + "  prevalence=" + format_g9(prevalence[k]) + "\n";
        for (const auto& [word, phi] : top_keywords(model, k, n_keywords))
            out += "  " + word + "\t" + format_g9(phi) + "\n";
        out += "\n";
    }
    return out;
}

std::string serialize_lda(const LdaModel& model) {
    std::string out = "#lda K=" + std::to_string(model.num_topics) + " V=" +
                      std::to_string(model.v()) + " D=" + std::to_string(model.n_dk.size()) +
                      " alpha=" + format_g9(model.alpha) + " beta=" + format_g9(model.beta) +
                      " seed=" + std::to_string(model.seed) + " iterations=" +
                      std::to_string(model.iterations) + "\n#vocab\n";
    for (const auto& w : model.vocab) out += w + "\n";
    out += "#nkw\n";
    for (int k = 0; k < model.num_topics; ++k) {
        std::string line;
        for (int w = 0; w < model.v(); ++w) {
            if (w) line += " ";
            line += std::to_string(model.n_kw[static_cast<std::size_t>(k) * model.v() + w]);
        }
        out += line + "\n";
    }
    out += "#ndk\n";
    for (const auto& dk : model.n_dk) {
        std::string line;
        for (int k = 0; k < model.num_topics; ++k) {
            if (k) line += " ";
            line += std::to_string(dk[k]);
        }
        out += line + "\n";
    }
    return out;
}

LdaModel parse_lda(const std::string& content) {
    auto lines = split(content, '\n');
    if (lines.empty() || lines[0].rfind("#lda ", 0) != 0)
        throw ParseError("LDA model file must start with \"#lda\"", 1);
    LdaModel m;
    long v = 0, d = 0;
    for (const auto& kv : split(lines[0].substr(5), ' ')) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
        try {
            if (key == "K") m.num_topics = std::stoi(val);
            else if (key == "V") v = std::stol(val);
            else if (key == "D") d = std::stol(val);
            else if (key == "alpha") m.alpha = std::stod(val);
            else if (key == "beta") m.beta = std::stod(val);
            else if (key == "seed") m.seed = std::stoull(val);
            else if (key == "iterations") m.iterations = std::stoi(val);
        } catch (const std::exception&) {
            throw ParseError("bad header entry: " + kv, 1);
        }
    }
    if (m.num_topics < 1 || v < 1) throw ParseError("bad LDA header", 1);

    std::size_t li = 1;
    auto expect = [&](const std::string& marker) {
        if (li >= lines.size() || trim(lines[li]) != marker)
            throw ParseError("expected section " + marker, static_cast<long>(li + 1));
        ++li;
    };
    expect("#vocab");
    for (long i = 0; i < v; ++i, ++li) {
        if (li >= lines.size()) throw ParseError("vocab truncated", static_cast<long>(li));
        std::string w = trim(lines[li]);
        if (w.empty()) throw ParseError("empty vocab entry", static_cast<long>(li + 1));
        m.index[w] = static_cast<int>(m.vocab.size());
        m.vocab.push_back(w);
    }
    expect("#nkw");
    m.n_kw.assign(static_cast<std::size_t>(m.num_topics) * v, 0);
    m.n_k.assign(m.num_topics, 0);
    for (int k = 0; k < m.num_topics; ++k, ++li) {
        if (li >= lines.size()) throw ParseError("nkw truncated", static_cast<long>(li));
        auto parts = split(trim(lines[li]), ' ');
        if (static_cast<long>(parts.size()) != v)
            throw ParseError("nkw row needs V entries", static_cast<long>(li + 1));
        for (long w = 0; w < v; ++w) {
            long long c;
            try {
                c = std::stoll(parts[w]);
            } catch (const std::exception&) {
                throw ParseError("bad count: " + parts[w], static_cast<long>(li + 1));
            }
            m.n_kw[static_cast<std::size_t>(k) * v + w] = c;
            m.n_k[k] += c;
        }
    }
    expect("#ndk");
    for (long i = 0; i < d; ++i, ++li) {
        if (li >= lines.size()) throw ParseError("ndk truncated", static_cast<long>(li));
        auto parts = split(trim(lines[li]), ' ');
        if (static_cast<int>(parts.size()) != m.num_topics)
            throw ParseError("ndk row needs K entries", static_cast<long>(li + 1));
        std::vector<long long> dk(m.num_topics);
        for (int k = 0; k < m.num_topics; ++k) {
            try {
                dk[k] = std::stoll(parts[k]);
            } catch (const std::exception&) {
                throw ParseError("bad count: " + parts[k], static_cast<long>(li + 1));
            }
        }
        m.n_dk.push_back(std::move(dk));
    }
    return m;
}

void save_lda(const LdaModel& model, const std::string& path) {
    write_file(path, serialize_lda(model));
}

LdaModel load_lda(const std::string& path) { return parse_lda(read_file(path)); }

}  // namespace im
