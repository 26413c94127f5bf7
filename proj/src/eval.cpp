#include "intent_miner/eval.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "intent_miner/csv.hpp"
#include "intent_miner/errors.hpp"
#include "intent_miner/util.hpp"

namespace im {

std::uint64_t LabelledSet::fingerprint() const {
    std::vector<std::string> lines;
    for (const auto& e : examples) lines.push_back(e.ticket_id + "\x1f" + e.use_case);
    std::sort(lines.begin(), lines.end());
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& l : lines) h = fnv1a(l + "\x1e", h);
    return h;
}

LabelledSet parse_labels_csv(const std::string& content) {
    csv::Table t = csv::parse(content);
    int id_col = -1, uc_col = -1;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        if (trim(t.header[i]) == "id") id_col = static_cast<int>(i);
        if (trim(t.header[i]) == "use_case") uc_col = static_cast<int>(i);
    }
    if (id_col < 0) throw ValidationError("labels: missing required column: id");
    if (uc_col < 0) throw ValidationError("labels: missing required column: use_case");
    LabelledSet set;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        LabelledExample e{t.rows[r][id_col], t.rows[r][uc_col]};
        if (e.ticket_id.empty() || e.use_case.empty())
            throw ParseError("labels: empty id or use_case", t.row_lines[r]);
        if (!seen.insert(e.ticket_id).second)
            throw ValidationError("labels: duplicate ticket id \"" + e.ticket_id + "\"");
        set.examples.push_back(std::move(e));
    }
    return set;
}

LabelledSet load_labels(const std::string& path) { return parse_labels_csv(read_file(path)); }

EvalReport evaluate(const LabelledSet& labelled, const TicketCollection& collection,
                    const Taxonomy& taxonomy, const EmbeddedTaxonomy& etx,
                    const EmbeddingModel& model, const MappingConfig& config, int top_k,
                    const Lexicon& lex) {
    if (top_k < 1) throw ValidationError("evaluate: top_k must be >= 1");

    std::set<std::string> known_use_cases;
    std::vector<std::string> use_case_order;
    for (const auto& d : taxonomy.domains)
        for (const auto& u : d.use_cases) {
            known_use_cases.insert(u.name);
            use_case_order.push_back(u.name);
        }
    std::unordered_map<std::string, const Ticket*> by_id;
    for (const auto& t : collection.tickets) by_id[t.id] = &t;

    // all-or-nothing validation before scoring starts
    for (const auto& e : labelled.examples) {
        if (!known_use_cases.count(e.use_case))
            throw ValidationError("evaluate: unknown use case label \"" + e.use_case + "\"");
        if (!by_id.count(e.ticket_id))
            throw ValidationError("evaluate: ticket id \"" + e.ticket_id + "\" not in collection");
    }

    EvalReport report;
    report.model_desc =
        architecture_name(model.config.architecture) + "-d" + std::to_string(model.dim());
    report.labels_fingerprint = labelled.fingerprint();
    report.subject_threshold = config.subject_threshold;
    report.use_subject = config.use_subject;
    report.top_k = top_k;

    std::map<std::string, UseCaseResult> stats;
    for (const auto& e : labelled.examples) {
        auto& s = stats[e.use_case];
        s.use_case = e.use_case;
        ++s.count;
        IntentRanking r = rank_intents(*by_id.at(e.ticket_id), etx, model, config, lex);
        if (!r.entries.empty() && r.entries.front().use_case == e.use_case) ++s.correct;
        for (int i = 0; i < std::min<int>(top_k, static_cast<int>(r.entries.size())); ++i) {
            if (r.entries[i].use_case == e.use_case) {
                ++s.topk_hits;
                break;
            }
        }
    }
    for (const auto& name : use_case_order) {
        auto it = stats.find(name);
        if (it == stats.end()) continue;
        report.per_use_case.push_back(it->second);
        report.total += it->second.count;
        report.total_correct += it->second.correct;
        report.total_topk += it->second.topk_hits;
    }
    return report;
}

std::string report_to_csv(const EvalReport& r) {
    std::string out =
        "model,labels_fingerprint,subject_threshold,use_subject,top_k,use_case,count,correct,"
        "accuracy,topk_hits,topk_rate\n";
    auto row = [&](const std::string& uc, int count, int correct, double acc, int hits,
                   double rate) {
        out += csv::to_line({r.model_desc, std::to_string(r.labels_fingerprint),
                             format_g9(r.subject_threshold), r.use_subject ? "1" : "0",
                             std::to_string(r.top_k), uc, std::to_string(count),
                             std::to_string(correct), format_g9(acc), std::to_string(hits),
                             format_g9(rate)});
    };
    for (const auto& u : r.per_use_case)
        row(u.use_case, u.count, u.correct, u.accuracy(), u.topk_hits, u.topk_rate());
    row("__overall__", r.total, r.total_correct, r.micro_accuracy(), r.total_topk,
        r.total ? static_cast<double>(r.total_topk) / r.total : 0.0);
    return out;
}

EvalReport parse_report_csv(const std::string& content) {
    csv::Table t = csv::parse(content);
    const std::vector<std::string> expected = {
        "model", "labels_fingerprint", "subject_threshold", "use_subject", "top_k",
        "use_case", "count", "correct", "accuracy", "topk_hits", "topk_rate"};
    if (t.header != expected) throw ParseError("unexpected eval report header", 1);
    EvalReport r;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        try {
            r.model_desc = row[0];
            r.labels_fingerprint = std::stoull(row[1]);
            r.subject_threshold = std::stod(row[2]);
            r.use_subject = row[3] == "1";
            r.top_k = std::stoi(row[4]);
            if (row[5] == "__overall__") {
                r.total = std::stoi(row[6]);
                r.total_correct = std::stoi(row[7]);
                r.total_topk = std::stoi(row[9]);
            } else {
                UseCaseResult u;
                u.use_case = row[5];
                u.count = std::stoi(row[6]);
                u.correct = std::stoi(row[7]);
                u.topk_hits = std::stoi(row[9]);
                r.per_use_case.push_back(std::move(u));
            }
        } catch (const std::exception&) {
            throw ParseError("bad eval report row", t.row_lines[i]);
        }
    }
    return r;
}

EvalReport load_report(const std::string& path) { return parse_report_csv(read_file(path)); }

namespace {

std::vector<std::string> shared_use_cases(const std::vector<EvalReport>& reports) {
    if (reports.empty()) throw ValidationError("compare: no reports given");
    for (const auto& r : reports)
        if (r.labels_fingerprint != reports.front().labels_fingerprint)
            throw ValidationError("compare: reports built from different labelled sets");
    std::vector<std::string> cols;
    for (const auto& u : reports.front().per_use_case) cols.push_back(u.use_case);
    return cols;
}

const UseCaseResult* find_uc(const EvalReport& r, const std::string& name) {
    for (const auto& u : r.per_use_case)
        if (u.use_case == name) return &u;
    return nullptr;
}

}  // namespace

std::string compare_to_csv(const std::vector<EvalReport>& reports) {
    auto cols = shared_use_cases(reports);
    std::string out = "Model";
    for (const auto& c : cols) out += "," + csv::escape(c);
    out += ",Overall\n";
    for (const auto& r : reports) {
        out += csv::escape(r.model_desc);
        for (const auto& c : cols) {
            const auto* u = find_uc(r, c);
            out += "," + (u ? format_g9(u->accuracy()) : std::string(""));
        }
        out += "," + format_g9(r.micro_accuracy()) + "\n";
    }
    out += "Total Number of Tickets";
    for (const auto& c : cols) {
        const auto* u = find_uc(reports.front(), c);
        out += "," + std::to_string(u ? u->count : 0);
    }
    out += "," + std::to_string(reports.front().total) + "\n";
    return out;
}

std::string compare_to_text(const std::vector<EvalReport>& reports) {
    auto cols = shared_use_cases(reports);
    std::vector<std::vector<std::string>> table;
    std::vector<std::string> header = {"Model"};
    header.insert(header.end(), cols.begin(), cols.end());
    header.push_back("Overall");
    table.push_back(header);
    for (const auto& r : reports) {
        std::vector<std::string> row = {r.model_desc};
        for (const auto& c : cols) {
            const auto* u = find_uc(r, c);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", u ? u->accuracy() : 0.0);
            row.push_back(buf);
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", r.micro_accuracy());
        row.push_back(buf);
        table.push_back(row);
    }
    std::vector<std::string> counts = {"Total Number of Tickets"};
    for (const auto& c : cols) {
        const auto* u = find_uc(reports.front(), c);
        counts.push_back(std::to_string(u ? u->count : 0));
    }
    counts.push_back(std::to_string(reports.front().total));
    table.push_back(counts);

    std::vector<std::size_t> widths(table[0].size(), 0);
    for (const auto& row : table)
        for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
    std::string out;
    for (const auto& row : table) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += row[i];
            if (i + 1 < row.size()) out += std::string(widths[i] - row[i].size() + 2, ' ');
        }
        out += "\n";
    }
    return out;
}

}  // namespace im
