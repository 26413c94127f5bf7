#include "intent_miner/corpus.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "intent_miner/csv.hpp"
#include "intent_miner/errors.hpp"
#include "intent_miner/util.hpp"

namespace im {

namespace {

const std::vector<std::string> kColumns = {"id", "subject", "body", "open_date", "priority"};

int find_column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (trim(header[i]) == name) return static_cast<int>(i);
    return -1;
}

std::string sanitize_label(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else
            out += '_';
    }
    return out;
}

}  // namespace

const std::vector<std::string>& noise_words() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> w;
        for (int i = 0; i < 30; ++i) w.push_back("zqfiller" + std::to_string(i));
        return w;
    }();
    return words;
}

bool is_noise_word(const std::string& w) { return w.rfind("zqfiller", 0) == 0; }

TicketCollection parse_tickets_csv(const std::string& content, const std::string& source) {
    csv::Table t = csv::parse(content);
    int id_col = find_column(t.header, "id");
    int body_col = find_column(t.header, "body");
    if (id_col < 0) throw ValidationError("missing required column: id");
    if (body_col < 0) throw ValidationError("missing required column: body");
    int subj_col = find_column(t.header, "subject");
    int date_col = find_column(t.header, "open_date");
    int prio_col = find_column(t.header, "priority");

    TicketCollection coll;
    coll.source = source;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        Ticket tk;
        tk.id = row[id_col];
        if (tk.id.empty())
            throw ParseError("empty ticket id", t.row_lines[r]);
        if (!seen.insert(tk.id).second)
            throw ValidationError("duplicate ticket id: \"" + tk.id + "\"");
        tk.body = row[body_col];
        if (subj_col >= 0 && !row[subj_col].empty()) tk.subject = row[subj_col];
        if (date_col >= 0 && !row[date_col].empty()) tk.open_date = row[date_col];
        if (prio_col >= 0 && !row[prio_col].empty()) tk.priority = row[prio_col];
        if (tk.body.empty() && (!tk.subject || tk.subject->empty()))
            throw ParseError("ticket \"" + tk.id + "\" has empty body and no subject",
                             t.row_lines[r]);
        coll.tickets.push_back(std::move(tk));
    }
    return coll;
}

TicketCollection load_tickets(const std::string& path) {
    return parse_tickets_csv(read_file(path), path);
}

std::string tickets_to_csv(const TicketCollection& collection) {
    std::string out = "id,subject,body,open_date,priority\n";
    for (const auto& t : collection.tickets) {
        out += csv::to_line({t.id, t.subject.value_or(""), t.body, t.open_date.value_or(""),
                             t.priority.value_or("")});
    }
    return out;
}

void write_tickets(const TicketCollection& collection, const std::string& path) {
    write_file(path, tickets_to_csv(collection));
}

TicketCollection generate_synthetic(const GeneratorSpec& spec) {
    if (spec.noise_rate < 0.0 || spec.noise_rate > 1.0)
        throw ValidationError("noise_rate must be in [0,1]");
    if (spec.topic_clusters.empty() && spec.intent_plants.empty())
        throw ValidationError("generator spec needs at least one cluster or intent plant");
    for (const auto& c : spec.topic_clusters)
        if (c.words.empty()) throw ValidationError("empty cluster vocabulary: " + c.name);
    for (const auto& p : spec.intent_plants)
        if (p.templates.empty()) throw ValidationError("intent plant has no templates: " + p.use_case);
    if (spec.disjoint) {
        std::set<std::string> all;
        for (const auto& c : spec.topic_clusters)
            for (const auto& w : c.words)
                if (!all.insert(w).second)
                    throw ValidationError("cluster vocabularies not disjoint at word: " + w);
    }

    const std::size_t n_sources = spec.topic_clusters.size() + spec.intent_plants.size();
    Rng rng(spec.seed);
    TicketCollection coll;
    coll.source = "synthetic(seed=" + std::to_string(spec.seed) + ")";
    for (std::size_t n = 0; n < spec.n_tickets; ++n) {
        std::size_t src = rng.next_below(n_sources);
        std::string label;
        std::vector<std::string> tokens;
        if (src < spec.topic_clusters.size()) {
            const auto& c = spec.topic_clusters[src];
            label = sanitize_label(c.name);
            std::size_t len = static_cast<std::size_t>(rng.next_in(8, 14));
            for (std::size_t i = 0; i < len; ++i)
                tokens.push_back(c.words[rng.next_below(c.words.size())]);
        } else {
            const auto& p = spec.intent_plants[src - spec.topic_clusters.size()];
            label = sanitize_label(p.use_case);
            const std::string& tpl = p.templates[rng.next_below(p.templates.size())];
            for (auto& tok : split(tpl, ' '))
                if (!tok.empty()) tokens.push_back(tok);
        }
        for (auto& tok : tokens) {
            if (rng.next_double() < spec.noise_rate)
                tok = noise_words()[rng.next_below(noise_words().size())];
        }
        Ticket t;
        t.id = "syn-" + label + "-" + std::to_string(n);
        t.body = join(tokens, " ");
        coll.tickets.push_back(std::move(t));
    }
    return coll;
}

std::string synthetic_label(const std::string& ticket_id) {
    if (ticket_id.rfind("syn-", 0) != 0) return "";
    std::size_t last = ticket_id.rfind('-');
    if (last <= 4) return "";
    return ticket_id.substr(4, last - 4);
}

GeneratorSpec parse_generator_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("generator spec is not valid JSON: ") + e.what());
    }
    GeneratorSpec spec;
    try {
        spec.n_tickets = j.at("n_tickets").get<std::size_t>();
        spec.seed = j.value("seed", std::uint64_t{0});
        spec.noise_rate = j.value("noise_rate", 0.0);
        spec.disjoint = j.value("disjoint", false);
        for (const auto& c : j.value("topic_clusters", nlohmann::json::array())) {
            TopicCluster tc;
            tc.name = c.at("name").get<std::string>();
            tc.words = c.at("words").get<std::vector<std::string>>();
            spec.topic_clusters.push_back(std::move(tc));
        }
        for (const auto& p : j.value("intent_plants", nlohmann::json::array())) {
            IntentPlant ip;
            ip.use_case = p.at("use_case").get<std::string>();
            ip.templates = p.at("templates").get<std::vector<std::string>>();
            spec.intent_plants.push_back(std::move(ip));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad generator spec: ") + e.what());
    }
    return spec;
}

GeneratorSpec load_generator_spec(const std::string& path) {
    return parse_generator_spec(read_file(path));
}

}  // namespace im
