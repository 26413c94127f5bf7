#include "intent_miner/intent.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "intent_miner/errors.hpp"
#include "intent_miner/util.hpp"

namespace im {

namespace {

// sentences of a ticket body through the TopicMapping pipeline; keeps the
// original split index of each embeddable sentence
struct EmbeddedSentence {
    int original_index;
    std::vector<double> vector;
};

std::vector<EmbeddedSentence> embed_body_sentences(const std::string& body,
                                                   const EmbeddingModel& model,
                                                   const Lexicon& lex) {
    std::vector<EmbeddedSentence> out;
    auto sentences = split_sentences(normalize(body));
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        auto toks = lemmatize(remove_stopwords(tokenize(sentences[i]), lex), lex);
        auto emb = sentence_embedding(model, toks);
        if (!emb) continue;
        out.push_back({static_cast<int>(i), std::move(*emb)});
    }
    return out;
}

}  // namespace

Taxonomy parse_taxonomy(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("taxonomy is not valid JSON: ") + e.what());
    }
    Taxonomy tax;
    try {
        for (const auto& jd : j.at("domains")) {
            IntentDomain d;
            d.name = jd.at("name").get<std::string>();
            for (const auto& ju : jd.at("use_cases")) {
                IntentUseCase u;
                u.name = ju.at("name").get<std::string>();
                u.variations = ju.at("variations").get<std::vector<std::string>>();
                d.use_cases.push_back(std::move(u));
            }
            tax.domains.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad taxonomy: ") + e.what());
    }

    std::set<std::string> domain_names, use_case_names;
    for (const auto& d : tax.domains) {
        if (d.name.empty()) throw ValidationError("taxonomy: empty domain name");
        if (!domain_names.insert(d.name).second)
            throw ValidationError("taxonomy: duplicate domain name \"" + d.name + "\"");
        for (const auto& u : d.use_cases) {
            if (u.name.empty()) throw ValidationError("taxonomy: empty use case name");
            if (!use_case_names.insert(u.name).second)
                throw ValidationError("taxonomy: duplicate use case name \"" + u.name + "\"");
            if (u.variations.empty())
                throw ValidationError("taxonomy: use case \"" + u.name + "\" has no variations");
            for (const auto& v : u.variations)
                if (trim(v).empty())
                    throw ValidationError("taxonomy: empty variation under \"" + u.name + "\"");
        }
    }
    return tax;
}

Taxonomy load_taxonomy(const std::string& path) { return parse_taxonomy(read_file(path)); }

std::string taxonomy_to_json(const Taxonomy& taxonomy) {
    nlohmann::ordered_json j;
    j["domains"] = nlohmann::ordered_json::array();
    for (const auto& d : taxonomy.domains) {
        nlohmann::ordered_json jd;
        jd["name"] = d.name;
        jd["use_cases"] = nlohmann::ordered_json::array();
        for (const auto& u : d.use_cases) {
            nlohmann::ordered_json ju;
            ju["name"] = u.name;
            ju["variations"] = u.variations;
            jd["use_cases"].push_back(std::move(ju));
        }
        j["domains"].push_back(std::move(jd));
    }
    return j.dump(2) + "\n";
}

EmbeddedTaxonomy embed_taxonomy(const Taxonomy& taxonomy, const EmbeddingModel& model,
                                const Lexicon& lex) {
    EmbeddedTaxonomy etx;
    etx.model_fingerprint = model.fingerprint();
    std::vector<std::string> failures;
    for (const auto& d : taxonomy.domains) {
        EmbeddedDomain ed;
        ed.name = d.name;
        for (const auto& u : d.use_cases) {
            EmbeddedUseCase eu;
            eu.name = u.name;
            for (const auto& v : u.variations) {
                auto emb = sentence_embedding(model, topic_tokens(v, lex));
                if (!emb) {
                    failures.push_back(u.name + ": \"" + v + "\"");
                    continue;
                }
                eu.variations.push_back({v, std::move(*emb)});
            }
            ed.use_cases.push_back(std::move(eu));
        }
        etx.domains.push_back(std::move(ed));
    }
    if (!failures.empty())
        throw ValidationError("unembeddable taxonomy variations: " + join(failures, "; "));
    return etx;
}

std::optional<std::string> classify_subject_domain(const std::optional<std::string>& subject,
                                                   const EmbeddedTaxonomy& etx,
                                                   const EmbeddingModel& model, double tau_s,
                                                   const Lexicon& lex) {
    if (!subject || trim(*subject).empty()) return std::nullopt;
    auto emb = sentence_embedding(model, topic_tokens(*subject, lex));
    if (!emb) return std::nullopt;

    std::optional<std::string> best_domain;
    double best_score = 0.0;
    for (const auto& d : etx.domains) {
        double domain_best = -2.0;
        for (const auto& u : d.use_cases)
            for (const auto& v : u.variations)
                domain_best = std::max(domain_best, cosine_similarity(*emb, v.vector));
        // strict > keeps the earliest domain on ties
        if (!best_domain || domain_best > best_score) {
            best_domain = d.name;
            best_score = domain_best;
        }
    }
    if (best_domain && best_score >= tau_s) return best_domain;
    return std::nullopt;
}

std::vector<std::vector<double>> score_matrix(const std::vector<std::vector<double>>& sentences,
                                              const EmbeddedUseCase& use_case) {
    std::vector<std::vector<double>> m;
    for (const auto& s : sentences) {
        std::vector<double> row;
        for (const auto& v : use_case.variations) row.push_back(cosine_similarity(s, v.vector));
        m.push_back(std::move(row));
    }
    return m;
}

IntentRanking rank_intents(const Ticket& ticket, const EmbeddedTaxonomy& etx,
                           const EmbeddingModel& model, const MappingConfig& config,
                           const Lexicon& lex) {
    if (etx.domains.empty()) throw ValidationError("rank_intents: empty embedded taxonomy");
    if (config.top_n < 1) throw ValidationError("rank_intents: top_n must be >= 1");

    IntentRanking ranking;
    ranking.ticket_id = ticket.id;

    std::optional<std::string> narrowed;
    if (config.use_subject)
        narrowed = classify_subject_domain(ticket.subject, etx, model, config.subject_threshold, lex);
    ranking.subject_narrowed = narrowed.has_value();

    auto sentences = embed_body_sentences(ticket.body, model, lex);
    if (sentences.empty()) {
        ranking.no_embeddable_sentences = true;
        return ranking;
    }

    std::vector<RankedIntent> candidates;
    for (const auto& d : etx.domains) {
        if (narrowed && d.name != *narrowed) continue;
        for (const auto& u : d.use_cases) {
            RankedIntent best{d.name, u.name, -2.0, -1, -1};
            for (const auto& s : sentences) {
                for (std::size_t k = 0; k < u.variations.size(); ++k) {
                    double score = cosine_similarity(s.vector, u.variations[k].vector);
                    if (score > best.score) {
                        best.score = score;
                        best.sentence_index = s.original_index;
                        best.variation_index = static_cast<int>(k);
                    }
                }
            }
            candidates.push_back(std::move(best));
        }
    }

    // stable sort preserves taxonomy declaration order on score ties
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const RankedIntent& a, const RankedIntent& b) { return a.score > b.score; });
    for (auto& c : candidates) {
        if (c.score < config.min_score) continue;
        if (static_cast<int>(ranking.entries.size()) >= config.top_n) break;
        ranking.entries.push_back(std::move(c));
    }
    return ranking;
}

std::vector<IntentRanking> rank_intents_batch(const TicketCollection& collection,
                                              const EmbeddedTaxonomy& etx,
                                              const EmbeddingModel& model,
                                              const MappingConfig& config, const Lexicon& lex) {
    std::vector<IntentRanking> out;
    out.reserve(collection.tickets.size());
    for (const auto& t : collection.tickets) {
        try {
            out.push_back(rank_intents(t, etx, model, config, lex));
        } catch (const std::exception&) {
            IntentRanking failed;
            failed.ticket_id = t.id;
            failed.no_embeddable_sentences = true;
            out.push_back(std::move(failed));
        }
    }
    return out;
}

std::string rankings_to_jsonl(const std::vector<IntentRanking>& rankings) {
    std::string out;
    for (const auto& r : rankings) {
        nlohmann::ordered_json j;
        j["id"] = r.ticket_id;
        j["subject_narrowed"] = r.subject_narrowed;
        j["no_embeddable_sentences"] = r.no_embeddable_sentences;
        j["ranking"] = nlohmann::ordered_json::array();
        for (const auto& e : r.entries) {
            nlohmann::ordered_json je;
            je["domain"] = e.domain;
            je["use_case"] = e.use_case;
            // serialized through the shared %.9g formatter so reruns diff clean
            je["score"] = nlohmann::ordered_json::parse(format_g9(e.score));
            je["sentence_index"] = e.sentence_index;
            je["variation_index"] = e.variation_index;
            j["ranking"].push_back(std::move(je));
        }
        out += j.dump() + "\n";
    }
    return out;
}

}  // namespace im
