// intent-miner: end-to-end workflow binary.
// ingest -> preprocess/mine-patterns -> train-embeddings -> lda grid +
// topics-report -> (taxonomy authored offline) -> map -> evaluate.

#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "intent_miner/corpus.hpp"
#include "intent_miner/csv.hpp"
#include "intent_miner/errors.hpp"
#include "intent_miner/eval.hpp"
#include "intent_miner/intent.hpp"
#include "intent_miner/preprocess.hpp"
#include "intent_miner/topics.hpp"
#include "intent_miner/util.hpp"

namespace {

using im::ValidationError;

// flat key/value config file: "embeddings.dim = 100", '#' comments
std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::map<std::string, std::string> kv;
    for (const auto& raw : im::split(im::read_file(path), '\n')) {
        std::string line = im::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line is not key = value: " + line);
        kv[im::trim(line.substr(0, eq))] = im::trim(line.substr(eq + 1));
    }
    return kv;
}

// Registry of every config key, used to reject unknown keys up front.
// defaults < config file < CLI flags.
class Config {
public:
    void load(const std::string& path) { file_ = parse_config_file(path); }

    void reject_unknown() const {
        for (const auto& [k, v] : file_)
            if (!known_.count(k)) throw ValidationError("unknown config key: " + k);
    }

    template <typename T>
    void apply(const std::string& key, T& value) {
        known_.insert(key);
        auto it = file_.find(key);
        if (it == file_.end()) return;
        std::istringstream ss(it->second);
        T parsed;
        if constexpr (std::is_same_v<T, std::string>) {
            parsed = it->second;
        } else if constexpr (std::is_same_v<T, bool>) {
            parsed = (it->second == "1" || it->second == "true");
        } else {
            ss >> parsed;
            if (ss.fail()) throw ValidationError("bad config value for " + key + ": " + it->second);
        }
        value = parsed;
    }

    void echo(const std::string& key, const std::string& value) {
        echo_ += key + " = " + value + "\n";
    }
    void flush_echo() {
        if (!echo_.empty()) std::cerr << "# resolved config\n" << echo_;
    }

private:
    std::map<std::string, std::string> file_;
    std::set<std::string> known_;
    std::string echo_;
};

std::vector<std::vector<std::string>> embedding_docs(const im::TicketCollection& coll,
                                                     const im::PatternLibrary& lib) {
    std::vector<std::vector<std::string>> docs;
    for (const auto& t : coll.tickets)
        docs.push_back(im::run_pipeline(t, im::PipelineMode::Embedding, lib).tokens);
    return docs;
}

std::vector<std::vector<std::string>> topic_docs(const im::TicketCollection& coll,
                                                 const im::PatternLibrary& lib) {
    std::vector<std::vector<std::string>> docs;
    for (const auto& t : coll.tickets)
        docs.push_back(im::run_pipeline(t, im::PipelineMode::TopicMapping, lib).tokens);
    return docs;
}

im::PatternLibrary maybe_patterns(const std::string& path) {
    return path.empty() ? im::PatternLibrary{} : im::load_pattern_library(path);
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& part : im::split(s, ','))
        if (!im::trim(part).empty()) out.push_back(std::stod(im::trim(part)));
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& part : im::split(s, ','))
        if (!im::trim(part).empty()) out.push_back(std::stoi(im::trim(part)));
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"intent-miner: unsupervised intent mining over support tickets"};
    app.require_subcommand(1);

    Config cfg;
    std::string config_path;
    if (const char* env = std::getenv("INTENT_MINER_CONFIG")) config_path = env;
    // pre-scan so file values land before CLI11 applies flags
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") config_path = argv[i + 1];
    if (!config_path.empty()) cfg.load(config_path);
    app.add_option("--config", config_path, "flat key=value config file");

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "load and validate a ticket CSV");
    std::string in_input, in_out;
    ingest->add_option("--input", in_input, "ticket CSV path")->required();
    ingest->add_option("--out", in_out, "rewrite canonical CSV here");

    // ---- gen-corpus ----
    auto* gen = app.add_subcommand("gen-corpus", "generate a seeded synthetic ticket corpus");
    std::string gen_spec, gen_out;
    gen->add_option("--spec", gen_spec, "generator spec JSON")->required();
    gen->add_option("--out", gen_out, "output ticket CSV")->required();

    // ---- preprocess ----
    auto* prep = app.add_subcommand("preprocess", "run the cleaning pipeline over tickets");
    std::string pp_input, pp_mode = "embedding", pp_patterns, pp_out;
    cfg.apply("preprocess.mode", pp_mode);
    cfg.apply("preprocess.patterns", pp_patterns);
    prep->add_option("--input", pp_input)->required();
    prep->add_option("--mode", pp_mode, "embedding|topicmapping");
    prep->add_option("--patterns", pp_patterns, "pattern library file");
    prep->add_option("--out", pp_out, "token stream output (stdout when absent)");

    // ---- mine-patterns ----
    auto* mine = app.add_subcommand("mine-patterns", "mine repeated boilerplate lines");
    std::string mp_input, mp_out;
    double mp_min_df = 0.5;
    cfg.apply("preprocess.min_doc_frequency", mp_min_df);
    mine->add_option("--input", mp_input)->required();
    mine->add_option("--min-df", mp_min_df, "document-frequency threshold in (0,1]");
    mine->add_option("--out", mp_out)->required();

    // ---- train-embeddings ----
    auto* tr = app.add_subcommand("train-embeddings", "train a word2vec model");
    std::string tr_input, tr_patterns, tr_out, tr_arch = "skipgram";
    im::TrainingConfig tc;
    double tr_subsample = 0.0;
    cfg.apply("embeddings.arch", tr_arch);
    cfg.apply("embeddings.dim", tc.dim);
    cfg.apply("embeddings.window", tc.window);
    cfg.apply("embeddings.negatives", tc.negatives);
    cfg.apply("embeddings.epochs", tc.epochs);
    cfg.apply("embeddings.lr", tc.initial_lr);
    cfg.apply("embeddings.min_count", tc.min_count);
    cfg.apply("embeddings.seed", tc.seed);
    cfg.apply("embeddings.subsample", tr_subsample);
    tr->add_option("--input", tr_input)->required();
    tr->add_option("--patterns", tr_patterns);
    tr->add_option("--arch", tr_arch, "cbow|skipgram");
    tr->add_option("--dim", tc.dim);
    tr->add_option("--window", tc.window);
    tr->add_option("--negatives", tc.negatives);
    tr->add_option("--epochs", tc.epochs);
    tr->add_option("--lr", tc.initial_lr);
    tr->add_option("--min-count", tc.min_count);
    tr->add_option("--seed", tc.seed);
    tr->add_option("--subsample", tr_subsample, "frequency threshold, 0 = off");
    tr->add_option("--out", tr_out)->required();

    // ---- neighbors ----
    auto* nb = app.add_subcommand("neighbors", "nearest neighbors of a word");
    std::string nb_model, nb_word;
    int nb_k = 7;
    nb->add_option("--model", nb_model)->required();
    nb->add_option("--word", nb_word)->required();
    nb->add_option("--k", nb_k);

    // ---- sentence-sim ----
    auto* ss = app.add_subcommand("sentence-sim", "cosine similarity of two texts");
    std::string ss_model, ss_a, ss_b;
    ss->add_option("--model", ss_model)->required();
    ss->add_option("--a", ss_a)->required();
    ss->add_option("--b", ss_b)->required();

    // ---- fit-lda ----
    auto* lda = app.add_subcommand("fit-lda", "fit an LDA model by collapsed Gibbs sampling");
    std::string lda_input, lda_patterns, lda_out;
    int lda_k = 20, lda_iters = 500;
    double lda_alpha = 0.1, lda_beta = 0.01;
    std::uint64_t lda_seed = 1;
    cfg.apply("topics.k", lda_k);
    cfg.apply("topics.alpha", lda_alpha);
    cfg.apply("topics.beta", lda_beta);
    cfg.apply("topics.iters", lda_iters);
    cfg.apply("topics.seed", lda_seed);
    lda->add_option("--input", lda_input)->required();
    lda->add_option("--patterns", lda_patterns);
    lda->add_option("--k", lda_k);
    lda->add_option("--alpha", lda_alpha);
    lda->add_option("--beta", lda_beta);
    lda->add_option("--iters", lda_iters);
    lda->add_option("--seed", lda_seed);
    lda->add_option("--out", lda_out)->required();

    // ---- lda-grid ----
    auto* grid = app.add_subcommand("lda-grid", "grid search over K/alpha/beta");
    std::string gr_input, gr_patterns, gr_out;
    std::string gr_k = "5,10,20,30", gr_alpha = "0.1", gr_beta = "0.01";
    double gr_split = 0.1;
    int gr_iters = 200, gr_foldin = 50;
    std::uint64_t gr_seed = 1;
    cfg.apply("topics.grid_k", gr_k);
    cfg.apply("topics.grid_alpha", gr_alpha);
    cfg.apply("topics.grid_beta", gr_beta);
    cfg.apply("topics.split", gr_split);
    cfg.apply("topics.grid_iters", gr_iters);
    cfg.apply("topics.foldin", gr_foldin);
    grid->add_option("--input", gr_input)->required();
    grid->add_option("--patterns", gr_patterns);
    grid->add_option("--k", gr_k, "comma-separated topic counts");
    grid->add_option("--alpha", gr_alpha, "comma-separated");
    grid->add_option("--beta", gr_beta, "comma-separated");
    grid->add_option("--split", gr_split, "validation fraction in (0,1)");
    grid->add_option("--iters", gr_iters);
    grid->add_option("--foldin", gr_foldin);
    grid->add_option("--seed", gr_seed);
    grid->add_option("--out", gr_out, "grid CSV output (stdout when absent)");

    // ---- topics-report ----
    auto* rep = app.add_subcommand("topics-report", "per-topic keyword report");
    std::string rep_model, rep_out;
    int rep_n = 15;
    rep->add_option("--model", rep_model)->required();
    rep->add_option("--n", rep_n, "keywords per topic");
    rep->add_option("--out", rep_out)->required();

    // ---- map ----
    auto* mp = app.add_subcommand("map", "rank taxonomy intents per ticket");
    std::string map_model, map_tax, map_input, map_out;
    im::MappingConfig mc;
    bool no_subject = false;
    cfg.apply("intent.subject_threshold", mc.subject_threshold);
    cfg.apply("intent.top_n", mc.top_n);
    cfg.apply("intent.min_score", mc.min_score);
    cfg.apply("intent.no_subject_narrowing", no_subject);
    mp->add_option("--model", map_model)->required();
    mp->add_option("--taxonomy", map_tax)->required();
    mp->add_option("--input", map_input)->required();
    mp->add_option("--out", map_out)->required();
    mp->add_option("--subject-threshold", mc.subject_threshold);
    mp->add_option("--top-n", mc.top_n);
    mp->add_option("--min-score", mc.min_score);
    mp->add_flag("--no-subject-narrowing", no_subject);

    // ---- evaluate ----
    auto* ev = app.add_subcommand("evaluate", "score mapping against labelled tickets");
    std::string ev_model, ev_tax, ev_input, ev_labels, ev_out;
    int ev_topk = 3;
    cfg.apply("eval.top_k", ev_topk);
    ev->add_option("--model", ev_model)->required();
    ev->add_option("--taxonomy", ev_tax)->required();
    ev->add_option("--input", ev_input)->required();
    ev->add_option("--labels", ev_labels)->required();
    ev->add_option("--out", ev_out)->required();
    ev->add_option("--top-k", ev_topk);
    ev->add_option("--subject-threshold", mc.subject_threshold);
    ev->add_option("--top-n", mc.top_n);
    ev->add_option("--min-score", mc.min_score);
    ev->add_flag("--no-subject-narrowing", no_subject);

    // ---- compare ----
    auto* cp = app.add_subcommand("compare", "tabulate eval reports side by side");
    std::string cp_reports, cp_out;
    cp->add_option("--reports", cp_reports, "comma-separated report CSV paths")->required();
    cp->add_option("--out", cp_out, "comparison CSV output");

    cfg.reject_unknown();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    if (*ingest) {
        auto coll = im::load_tickets(in_input);
        if (!in_out.empty()) im::write_tickets(coll, in_out);
        std::cout << "tickets: " << coll.tickets.size() << "\n";
    } else if (*gen) {
        auto spec = im::load_generator_spec(gen_spec);
        cfg.echo("corpus.seed", std::to_string(spec.seed));
        auto coll = im::generate_synthetic(spec);
        im::write_tickets(coll, gen_out);
        std::cerr << "generated " << coll.tickets.size() << " tickets -> " << gen_out << "\n";
    } else if (*prep) {
        cfg.echo("preprocess.mode", pp_mode);
        cfg.echo("preprocess.patterns", pp_patterns);
        auto coll = im::load_tickets(pp_input);
        auto lib = maybe_patterns(pp_patterns);
        im::PipelineMode mode;
        if (pp_mode == "embedding") mode = im::PipelineMode::Embedding;
        else if (pp_mode == "topicmapping") mode = im::PipelineMode::TopicMapping;
        else throw ValidationError("unknown mode: " + pp_mode + " (embedding|topicmapping)");
        std::string out;
        for (const auto& t : coll.tickets) {
            auto p = im::run_pipeline(t, mode, lib);
            if (mode == im::PipelineMode::Embedding) {
                out += im::join(p.tokens, " ") + "\n";
            } else {
                std::vector<std::string> sents;
                for (const auto& s : p.sentences) sents.push_back(im::join(s, " "));
                out += im::join(sents, " | ") + "\n";
            }
        }
        if (pp_out.empty()) std::cout << out;
        else im::write_file(pp_out, out);
    } else if (*mine) {
        cfg.echo("preprocess.min_doc_frequency", im::format_g9(mp_min_df));
        auto coll = im::load_tickets(mp_input);
        auto lib = im::mine_patterns(coll, mp_min_df);
        im::save_pattern_library(lib, mp_out);
        std::cerr << "mined " << lib.patterns.size() << " patterns -> " << mp_out << "\n";
    } else if (*tr) {
        tc.architecture = im::architecture_from_name(tr_arch);
        if (tr_subsample > 0.0) tc.subsample_t = tr_subsample;
        cfg.echo("embeddings.arch", tr_arch);
        cfg.echo("embeddings.dim", std::to_string(tc.dim));
        cfg.echo("embeddings.window", std::to_string(tc.window));
        cfg.echo("embeddings.negatives", std::to_string(tc.negatives));
        cfg.echo("embeddings.epochs", std::to_string(tc.epochs));
        cfg.echo("embeddings.lr", im::format_g9(tc.initial_lr));
        cfg.echo("embeddings.min_count", std::to_string(tc.min_count));
        cfg.echo("embeddings.seed", std::to_string(tc.seed));
        cfg.echo("embeddings.subsample", im::format_g9(tr_subsample));
        auto coll = im::load_tickets(tr_input);
        auto docs = embedding_docs(coll, maybe_patterns(tr_patterns));
        im::TrainStats stats;
        auto model = im::train(docs, tc, &stats);
        for (std::size_t e = 0; e < stats.epoch_mean_loss.size(); ++e)
            std::cerr << "epoch " << (e + 1) << " mean loss " << stats.epoch_mean_loss[e] << "\n";
        im::save_model(model, tr_out);
        std::cerr << "V=" << model.vocab.size() << " -> " << tr_out << "\n";
    } else if (*nb) {
        auto model = im::load_model(nb_model);
        for (const auto& n : im::nearest_neighbors(model, nb_word, nb_k))
            std::cout << n.word << "\t" << im::format_g9(n.score) << "\n";
    } else if (*ss) {
        auto model = im::load_model(ss_model);
        auto ea = im::sentence_embedding(model, im::topic_tokens(ss_a));
        auto eb = im::sentence_embedding(model, im::topic_tokens(ss_b));
        if (!ea) throw ValidationError("text a has no in-vocabulary tokens");
        if (!eb) throw ValidationError("text b has no in-vocabulary tokens");
        std::cout << im::format_g9(im::cosine_similarity(*ea, *eb)) << "\n";
    } else if (*lda) {
        cfg.echo("topics.k", std::to_string(lda_k));
        cfg.echo("topics.alpha", im::format_g9(lda_alpha));
        cfg.echo("topics.beta", im::format_g9(lda_beta));
        cfg.echo("topics.iters", std::to_string(lda_iters));
        cfg.echo("topics.seed", std::to_string(lda_seed));
        auto coll = im::load_tickets(lda_input);
        auto corpus = im::BowCorpus::build(topic_docs(coll, maybe_patterns(lda_patterns)));
        auto model = im::fit_lda(corpus, lda_k, lda_alpha, lda_beta, lda_iters, lda_seed);
        im::save_lda(model, lda_out);
        std::cerr << "LDA K=" << lda_k << " V=" << model.v() << " -> " << lda_out << "\n";
    } else if (*grid) {
        cfg.echo("topics.grid_k", gr_k);
        cfg.echo("topics.grid_alpha", gr_alpha);
        cfg.echo("topics.grid_beta", gr_beta);
        cfg.echo("topics.split", im::format_g9(gr_split));
        cfg.echo("topics.grid_iters", std::to_string(gr_iters));
        cfg.echo("topics.foldin", std::to_string(gr_foldin));
        auto coll = im::load_tickets(gr_input);
        auto corpus = im::BowCorpus::build(topic_docs(coll, maybe_patterns(gr_patterns)));
        auto result = im::grid_search(corpus, gr_split, parse_int_list(gr_k),
                                      parse_double_list(gr_alpha), parse_double_list(gr_beta),
                                      gr_iters, gr_foldin, gr_seed);
        std::string out = im::grid_to_csv(result);
        if (gr_out.empty()) std::cout << out;
        else im::write_file(gr_out, out);
        const auto& best = result.rows[result.best];
        std::cerr << "best: K=" << best.num_topics << " alpha=" << best.alpha
                  << " beta=" << best.beta << " perplexity=" << best.heldout_perplexity << "\n";
    } else if (*rep) {
        auto model = im::load_lda(rep_model);
        im::write_file(rep_out, im::topics_report(model, rep_n));
    } else if (*mp) {
        mc.use_subject = !no_subject;
        cfg.echo("intent.subject_threshold", im::format_g9(mc.subject_threshold));
        cfg.echo("intent.top_n", std::to_string(mc.top_n));
        cfg.echo("intent.min_score", im::format_g9(mc.min_score));
        cfg.echo("intent.no_subject_narrowing", no_subject ? "1" : "0");
        auto model = im::load_model(map_model);
        auto etx = im::embed_taxonomy(im::load_taxonomy(map_tax), model);
        auto coll = im::load_tickets(map_input);
        im::write_file(map_out, im::rankings_to_jsonl(im::rank_intents_batch(coll, etx, model, mc)));
    } else if (*ev) {
        mc.use_subject = !no_subject;
        cfg.echo("intent.subject_threshold", im::format_g9(mc.subject_threshold));
        cfg.echo("intent.top_n", std::to_string(mc.top_n));
        cfg.echo("intent.min_score", im::format_g9(mc.min_score));
        cfg.echo("intent.no_subject_narrowing", no_subject ? "1" : "0");
        cfg.echo("eval.top_k", std::to_string(ev_topk));
        auto model = im::load_model(ev_model);
        auto tax = im::load_taxonomy(ev_tax);
        auto etx = im::embed_taxonomy(tax, model);
        auto coll = im::load_tickets(ev_input);
        auto labels = im::load_labels(ev_labels);
        auto report = im::evaluate(labels, coll, tax, etx, model, mc, ev_topk);
        im::write_file(ev_out, im::report_to_csv(report));
        std::cerr << "micro accuracy: " << report.micro_accuracy() << " over " << report.total
                  << " tickets\n";
    } else if (*cp) {
        std::vector<im::EvalReport> reports;
        for (const auto& path : im::split(cp_reports, ','))
            if (!im::trim(path).empty()) reports.push_back(im::load_report(im::trim(path)));
        if (!cp_out.empty()) im::write_file(cp_out, im::compare_to_csv(reports));
        std::cout << im::compare_to_text(reports);
    }

    cfg.flush_echo();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const im::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
