#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace im {

struct Ticket {
    std::string id;
    std::optional<std::string> subject;
    std::string body;
    std::optional<std::string> open_date;
    std::optional<std::string> priority;

    bool operator==(const Ticket&) const = default;
};

// Immutable after construction; iteration order equals file / generation order.
struct TicketCollection {
    std::vector<Ticket> tickets;
    std::string source;
};

struct TopicCluster {
    std::string name;
    std::vector<std::string> words;
};

struct IntentPlant {
    std::string use_case;
    std::vector<std::string> templates;
};

struct GeneratorSpec {
    std::size_t n_tickets = 0;
    std::vector<TopicCluster> topic_clusters;
    std::vector<IntentPlant> intent_plants;
    double noise_rate = 0.0;
    std::uint64_t seed = 0;
    bool disjoint = false;  // require pairwise-disjoint cluster vocabularies
};

// Tokens substituted into generated bodies at noise_rate. The "zq" prefix
// keeps them recognizable to counting oracles.
const std::vector<std::string>& noise_words();
bool is_noise_word(const std::string& w);

// CSV schema: id,subject,body,open_date,priority (header required, id+body
// mandatory columns). Missing optional columns become absent fields.
TicketCollection load_tickets(const std::string& path);
TicketCollection parse_tickets_csv(const std::string& content, const std::string& source);
void write_tickets(const TicketCollection& collection, const std::string& path);
std::string tickets_to_csv(const TicketCollection& collection);

// Deterministic per spec (seed included). Ground-truth label rides in the
// ticket id: syn-<label>-<n>.
TicketCollection generate_synthetic(const GeneratorSpec& spec);
GeneratorSpec parse_generator_spec(const std::string& json_text);
GeneratorSpec load_generator_spec(const std::string& path);

// Recovers <label> from a synthetic id; empty string when not synthetic.
std::string synthetic_label(const std::string& ticket_id);

}  // namespace im
