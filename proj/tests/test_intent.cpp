#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "intent_miner/errors.hpp"
#include "intent_miner/intent.hpp"
#include "intent_miner/util.hpp"

using namespace im;

namespace {

EmbeddingModel make_model(const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
    EmbeddingModel m;
    m.config.dim = static_cast<int>(rows[0].second.size());
    m.config.min_count = 1;
    for (const auto& [w, v] : rows) {
        m.vocab.add_entry(w, 10);
        m.w_in.insert(m.w_in.end(), v.begin(), v.end());
    }
    m.w_out.assign(m.w_in.size(), 0.0);
    return m;
}

// words chosen to pass through the topic pipeline unchanged
const std::vector<std::string> kWords = {"refund", "invoice", "parcel", "track",
                                         "cancel", "account", "order",  "help"};

EmbeddingModel random_model(std::uint64_t seed, int dim) {
    Rng rng(seed);
    std::vector<std::pair<std::string, std::vector<double>>> rows;
    for (const auto& w : kWords) {
        std::vector<double> v;
        for (int i = 0; i < dim; ++i) v.push_back(rng.next_real(-1.0, 1.0) + 0.1);
        rows.emplace_back(w, v);
    }
    return make_model(rows);
}

std::vector<double> unit(std::vector<double> v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return v;
}

double naive_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> oracle_embed(const EmbeddingModel& m, const std::vector<std::string>& words) {
    std::vector<double> acc(m.dim(), 0.0);
    int n = 0;
    for (const auto& w : words) {
        int i = m.vocab.index_of(w);
        if (i < 0) continue;
        auto u = unit({m.in_row(i).begin(), m.in_row(i).end()});
        for (int j = 0; j < m.dim(); ++j) acc[j] += u[j];
        ++n;
    }
    for (double& x : acc) x /= n;
    return acc;
}

const std::string kTaxonomyJson = R"({
  "domains": [
    {"name": "Billing", "use_cases": [
      {"name": "Get Refund", "variations": ["refund", "refund invoice", "invoice"]},
      {"name": "Dispute Invoice", "variations": ["invoice account"]}]},
    {"name": "Shipping", "use_cases": [
      {"name": "Track Order", "variations": ["track parcel", "track order"]}]}
  ]})";

}  // namespace

TEST_CASE("parse_taxonomy: structure and round trip") {
    auto tax = parse_taxonomy(kTaxonomyJson);
    REQUIRE(tax.domains.size() == 2);
    CHECK(tax.domains[0].name == "Billing");
    REQUIRE(tax.domains[0].use_cases.size() == 2);
    CHECK(tax.domains[0].use_cases[0].variations.size() == 3);
    auto again = parse_taxonomy(taxonomy_to_json(tax));
    CHECK(taxonomy_to_json(again) == taxonomy_to_json(tax));
}

TEST_CASE("parse_taxonomy: validation failures") {
    CHECK_THROWS_AS(parse_taxonomy("{"), ParseError);
    CHECK_THROWS_AS(parse_taxonomy("{}"), ValidationError);
    CHECK_THROWS_AS(parse_taxonomy(R"({"domains": [
        {"name": "A", "use_cases": [{"name": "u1", "variations": ["x"]}]},
        {"name": "A", "use_cases": [{"name": "u2", "variations": ["x"]}]}]})"),
                    ValidationError);
    // use case names must be unique across domains
    CHECK_THROWS_AS(parse_taxonomy(R"({"domains": [
        {"name": "A", "use_cases": [{"name": "u", "variations": ["x"]}]},
        {"name": "B", "use_cases": [{"name": "u", "variations": ["x"]}]}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_taxonomy(R"({"domains": [
        {"name": "A", "use_cases": [{"name": "u", "variations": []}]}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_taxonomy(R"({"domains": [
        {"name": "A", "use_cases": [{"name": "u", "variations": ["  "]}]}]})"),
                    ValidationError);
}

TEST_CASE("embed_taxonomy: variation vectors match the sentence rule") {
    auto model = make_model({{"refund", {3.0, 4.0}}, {"invoice", {0.0, 2.0}}});
    Taxonomy tax = parse_taxonomy(R"({"domains": [{"name": "B", "use_cases": [
        {"name": "u", "variations": ["refund", "refund invoice"]}]}]})");
    auto etx = embed_taxonomy(tax, model);
    const auto& vars = etx.domains[0].use_cases[0].variations;
    REQUIRE(vars.size() == 2);
    CHECK(vars[0].vector[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(vars[0].vector[1] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(vars[1].vector[0] == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(vars[1].vector[1] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(etx.model_fingerprint == model.fingerprint());
}

TEST_CASE("embed_taxonomy: stopword-only or OOV variation aborts with its text") {
    auto model = make_model({{"refund", {1.0, 0.0}}});
    Taxonomy tax = parse_taxonomy(R"({"domains": [{"name": "B", "use_cases": [
        {"name": "u", "variations": ["refund", "the a an"]}]}]})");
    try {
        embed_taxonomy(tax, model);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("the a an") != std::string::npos);
    }
}

TEST_CASE("classify_subject_domain: threshold gate and earliest-domain ties") {
    // subject "help" sits at cosine 0.6 from Billing and 0.8 from Shipping
    auto model = make_model(
        {{"refund", {1.0, 0.0}}, {"track", {0.0, 1.0}}, {"help", {0.6, 0.8}}});
    Taxonomy tax = parse_taxonomy(R"({"domains": [
        {"name": "Billing", "use_cases": [{"name": "u1", "variations": ["refund"]}]},
        {"name": "Shipping", "use_cases": [{"name": "u2", "variations": ["track"]}]}]})");
    auto etx = embed_taxonomy(tax, model);
    auto got = classify_subject_domain(std::string("help"), etx, model, 0.7);
    REQUIRE(got.has_value());
    CHECK(*got == "Shipping");
    CHECK_FALSE(classify_subject_domain(std::string("help"), etx, model, 0.9).has_value());
    CHECK_FALSE(classify_subject_domain(std::nullopt, etx, model, 0.0).has_value());
    CHECK_FALSE(classify_subject_domain(std::string("   "), etx, model, 0.0).has_value());
    // subject of stopwords embeds to nothing
    CHECK_FALSE(classify_subject_domain(std::string("the a"), etx, model, 0.0).has_value());
    // an exact tie keeps the earlier domain
    auto tied = classify_subject_domain(std::string("refund track"), etx, model, 0.0);
    REQUIRE(tied.has_value());
    CHECK(*tied == "Billing");
}

TEST_CASE("score_matrix equals the naive double loop") {
    auto model = random_model(21, 6);
    auto etx = embed_taxonomy(parse_taxonomy(kTaxonomyJson), model);
    Rng rng(22);
    std::vector<std::vector<double>> sentences;
    for (int s = 0; s < 5; ++s) {
        std::vector<double> v;
        for (int i = 0; i < 6; ++i) v.push_back(rng.next_real(-1.0, 1.0) + 0.05);
        sentences.push_back(v);
    }
    for (const auto& d : etx.domains) {
        for (const auto& u : d.use_cases) {
            auto m = score_matrix(sentences, u);
            REQUIRE(m.size() == sentences.size());
            for (std::size_t n = 0; n < sentences.size(); ++n) {
                REQUIRE(m[n].size() == u.variations.size());
                for (std::size_t k = 0; k < u.variations.size(); ++k)
                    CHECK(m[n][k] ==
                          doctest::Approx(naive_cosine(sentences[n], u.variations[k].vector))
                              .epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("rank_intents: verbatim variation body puts its use case on top at ~1") {
    auto model = random_model(5, 8);
    auto etx = embed_taxonomy(parse_taxonomy(kTaxonomyJson), model);
    Ticket t;
    t.id = "t1";
    t.body = "track parcel";
    MappingConfig cfg;
    cfg.use_subject = false;
    auto r = rank_intents(t, etx, model, cfg);
    REQUIRE(!r.entries.empty());
    CHECK(r.entries[0].use_case == "Track Order");
    CHECK(r.entries[0].score == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.entries[0].sentence_index == 0);
    CHECK(r.entries[0].variation_index == 0);
    CHECK_FALSE(r.subject_narrowed);
    for (std::size_t i = 1; i < r.entries.size(); ++i)
        CHECK(r.entries[i - 1].score >= r.entries[i].score);
}

TEST_CASE("rank_intents: subject narrowing restricts candidates to one domain") {
    auto model = random_model(6, 8);
    auto etx = embed_taxonomy(parse_taxonomy(kTaxonomyJson), model);
    Ticket t;
    t.id = "t1";
    t.subject = "track parcel";
    t.body = "refund invoice. track order";
    MappingConfig cfg;
    cfg.subject_threshold = 0.99;
    auto r = rank_intents(t, etx, model, cfg);
    CHECK(r.subject_narrowed);
    for (const auto& e : r.entries) CHECK(e.domain == "Shipping");

    cfg.use_subject = false;
    auto all = rank_intents(t, etx, model, cfg);
    CHECK_FALSE(all.subject_narrowed);
    std::set<std::string> domains;
    for (const auto& e : all.entries) domains.insert(e.domain);
    CHECK(domains.size() == 2);
    CHECK(all.entries.size() == 3);  // every use case scored once
}

TEST_CASE("rank_intents: top_n cut, min_score floor, unembeddable body") {
    auto model = random_model(7, 8);
    auto etx = embed_taxonomy(parse_taxonomy(kTaxonomyJson), model);
    Ticket t;
    t.id = "t1";
    t.body = "refund. cancel account. parcel";
    MappingConfig cfg;
    cfg.use_subject = false;
    auto full = rank_intents(t, etx, model, cfg);
    cfg.top_n = 1;
    auto cut = rank_intents(t, etx, model, cfg);
    REQUIRE(cut.entries.size() == 1);
    CHECK(cut.entries[0].use_case == full.entries[0].use_case);
    CHECK(cut.entries[0].score == full.entries[0].score);

    cfg.top_n = 5;
    cfg.min_score = 2.0;  // above any cosine
    CHECK(rank_intents(t, etx, model, cfg).entries.empty());
    cfg.min_score = full.entries[0].score;  // exactly the best score passes
    CHECK(rank_intents(t, etx, model, cfg).entries.size() >= 1);

    Ticket empty;
    empty.id = "e";
    empty.body = "the of and";
    MappingConfig dflt;
    auto r = rank_intents(empty, etx, model, dflt);
    CHECK(r.no_embeddable_sentences);
    CHECK(r.entries.empty());

    CHECK_THROWS_AS(rank_intents(t, EmbeddedTaxonomy{}, model, dflt), ValidationError);
    MappingConfig bad;
    bad.top_n = 0;
    CHECK_THROWS_AS(rank_intents(t, etx, model, bad), ValidationError);
}

TEST_CASE("rank_intents: duplicate variations change nothing but the tie index") {
    auto model = random_model(8, 8);
    auto tax = parse_taxonomy(kTaxonomyJson);
    auto dup = tax;
    for (auto& d : dup.domains)
        for (auto& u : d.use_cases) {
            auto vars = u.variations;
            u.variations.insert(u.variations.end(), vars.begin(), vars.end());
        }
    auto etx = embed_taxonomy(tax, model);
    auto etx_dup = embed_taxonomy(dup, model);
    Ticket t;
    t.id = "t";
    t.body = "cancel order. invoice help";
    MappingConfig cfg;
    cfg.use_subject = false;
    auto a = rank_intents(t, etx, model, cfg);
    auto b = rank_intents(t, etx_dup, model, cfg);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].use_case == b.entries[i].use_case);
        CHECK(a.entries[i].score == doctest::Approx(b.entries[i].score).epsilon(1e-12));
        CHECK(a.entries[i].variation_index == b.entries[i].variation_index);  // first wins
    }
}

TEST_CASE("rank_intents: sentence order permutation leaves scores unchanged") {
    auto model = random_model(9, 8);
    auto etx = embed_taxonomy(parse_taxonomy(kTaxonomyJson), model);
    Ticket t, p;
    t.id = p.id = "t";
    t.body = "refund invoice. track parcel. cancel account";
    p.body = "cancel account. refund invoice. track parcel";
    MappingConfig cfg;
    cfg.use_subject = false;
    auto a = rank_intents(t, etx, model, cfg);
    auto b = rank_intents(p, etx, model, cfg);
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        CHECK(a.entries[i].use_case == b.entries[i].use_case);
        CHECK(a.entries[i].score == doctest::Approx(b.entries[i].score).epsilon(1e-12));
    }
}

TEST_CASE("rank_intents agrees with a brute-force oracle on random instances") {
    const auto& lex = Lexicon::builtin();
    for (const auto& w : kWords) REQUIRE(topic_tokens(w, lex) == std::vector<std::string>{w});

    Rng rng(4242);
    for (int iter = 0; iter < 100; ++iter) {
        auto model = random_model(1000 + iter, 4);

        // random taxonomy: 2 domains, 1-2 use cases each, 1-3 variations
        Taxonomy tax;
        int uc_id = 0;
        for (int d = 0; d < 2; ++d) {
            IntentDomain dom;
            dom.name = "D" + std::to_string(d);
            int n_uc = 1 + static_cast<int>(rng.next_below(2));
            for (int u = 0; u < n_uc; ++u) {
                IntentUseCase uc;
                uc.name = "U" + std::to_string(uc_id++);
                int n_var = 1 + static_cast<int>(rng.next_below(3));
                for (int v = 0; v < n_var; ++v) {
                    std::string var = kWords[rng.next_below(kWords.size())];
                    if (rng.next_below(2)) var += " " + kWords[rng.next_below(kWords.size())];
                    uc.variations.push_back(var);
                }
                dom.use_cases.push_back(uc);
            }
            tax.domains.push_back(dom);
        }
        auto etx = embed_taxonomy(tax, model);

        // random body of 1-4 sentences, occasionally an unembeddable one
        Ticket t;
        t.id = "t";
        int n_sent = 1 + static_cast<int>(rng.next_below(4));
        std::vector<std::string> sentences;
        for (int s = 0; s < n_sent; ++s) {
            if (rng.next_below(5) == 0) {
                sentences.push_back("the of and");
                continue;
            }
            std::string sent = kWords[rng.next_below(kWords.size())];
            if (rng.next_below(2)) sent += " " + kWords[rng.next_below(kWords.size())];
            sentences.push_back(sent);
        }
        t.body = join(sentences, ". ");
        bool with_subject = rng.next_below(2) == 1;
        if (with_subject) t.subject = kWords[rng.next_below(kWords.size())];

        MappingConfig cfg;
        cfg.use_subject = with_subject;
        cfg.subject_threshold = rng.next_real(0.0, 1.1);
        cfg.top_n = 1 + static_cast<int>(rng.next_below(5));

        // oracle: embed everything by hand, then exhaustive max
        std::optional<std::string> narrowed;
        if (with_subject) {
            auto subj = oracle_embed(model, {*t.subject});
            std::optional<std::string> best_d;
            double best_s = 0.0;
            for (const auto& d : tax.domains) {
                double db = -2.0;
                for (const auto& u : d.use_cases)
                    for (const auto& v : u.variations)
                        db = std::max(db,
                                      naive_cosine(subj, oracle_embed(model, split(v, ' '))));
                if (!best_d || db > best_s) {
                    best_d = d.name;
                    best_s = db;
                }
            }
            if (best_d && best_s >= cfg.subject_threshold) narrowed = best_d;
        }
        struct Cand {
            std::string domain, use_case;
            double score;
            int sent, var;
        };
        std::vector<Cand> cands;
        for (const auto& d : tax.domains) {
            if (narrowed && d.name != *narrowed) continue;
            for (const auto& u : d.use_cases) {
                Cand best{d.name, u.name, -2.0, -1, -1};
                for (int s = 0; s < n_sent; ++s) {
                    if (sentences[s] == "the of and") continue;
                    auto se = oracle_embed(model, split(sentences[s], ' '));
                    for (std::size_t k = 0; k < u.variations.size(); ++k) {
                        double sc =
                            naive_cosine(se, oracle_embed(model, split(u.variations[k], ' ')));
                        if (sc > best.score) best = {d.name, u.name, sc, s, static_cast<int>(k)};
                    }
                }
                cands.push_back(best);
            }
        }
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Cand& a, const Cand& b) { return a.score > b.score; });
        std::erase_if(cands, [&](const Cand& c) { return c.score < cfg.min_score; });
        if (static_cast<int>(cands.size()) > cfg.top_n) cands.resize(cfg.top_n);

        auto got = rank_intents(t, etx, model, cfg);
        bool all_stop = true;
        for (const auto& s : sentences) all_stop = all_stop && s == "the of and";
        if (all_stop) {
            CHECK(got.no_embeddable_sentences);
            continue;
        }
        CHECK(got.subject_narrowed == narrowed.has_value());
        REQUIRE(got.entries.size() == cands.size());
        for (std::size_t i = 0; i < cands.size(); ++i) {
            CHECK(got.entries[i].domain == cands[i].domain);
            CHECK(got.entries[i].use_case == cands[i].use_case);
            CHECK(got.entries[i].score == doctest::Approx(cands[i].score).epsilon(1e-9));
            CHECK(got.entries[i].sentence_index == cands[i].sent);
            CHECK(got.entries[i].variation_index == cands[i].var);
        }
    }
}

TEST_CASE("rank_intents_batch: order, isolation, determinism") {
    auto model = random_model(11, 8);
    auto etx = embed_taxonomy(parse_taxonomy(kTaxonomyJson), model);
    TicketCollection coll;
    Ticket a, b, c;
    a.id = "a";
    a.body = "refund invoice";
    b.id = "b";
    b.body = "the of and";  // nothing embeddable
    c.id = "c";
    c.body = "track parcel";
    coll.tickets = {a, b, c};
    MappingConfig cfg;
    cfg.use_subject = false;
    auto out = rank_intents_batch(coll, etx, model, cfg);
    REQUIRE(out.size() == 3);
    CHECK(out[0].ticket_id == "a");
    CHECK(out[1].ticket_id == "b");
    CHECK(out[1].no_embeddable_sentences);
    CHECK(out[1].entries.empty());
    CHECK(out[2].ticket_id == "c");
    CHECK(!out[2].entries.empty());
    auto rerun = rank_intents_batch(coll, etx, model, cfg);
    CHECK(rankings_to_jsonl(rerun) == rankings_to_jsonl(out));
}

TEST_CASE("rankings_to_jsonl: one parsable record per ticket with stable fields") {
    auto model = random_model(12, 8);
    auto etx = embed_taxonomy(parse_taxonomy(kTaxonomyJson), model);
    TicketCollection coll;
    Ticket a;
    a.id = "a";
    a.body = "cancel account";
    coll.tickets = {a};
    MappingConfig cfg;
    cfg.use_subject = false;
    auto text = rankings_to_jsonl(rank_intents_batch(coll, etx, model, cfg));
    auto lines = split(text, '\n');
    REQUIRE(lines.size() == 2);  // trailing newline
    auto j = nlohmann::json::parse(lines[0]);
    CHECK(j["id"] == "a");
    CHECK(j["subject_narrowed"] == false);
    CHECK(j["no_embeddable_sentences"] == false);
    REQUIRE(j["ranking"].is_array());
    REQUIRE(!j["ranking"].empty());
    const auto& e = j["ranking"][0];
    CHECK(e.contains("domain"));
    CHECK(e.contains("use_case"));
    CHECK(e.contains("score"));
    CHECK(e.contains("sentence_index"));
    CHECK(e.contains("variation_index"));
}
