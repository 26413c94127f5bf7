#include "intent_miner/csv.hpp"

#include "intent_miner/errors.hpp"
#include "intent_miner/util.hpp"

namespace im::csv {

namespace {

struct Cursor {
    const std::string& s;
    std::size_t i = 0;
    long line = 1;

    bool done() const { return i >= s.size(); }
    char peek() const { return s[i]; }
    char take() {
        char c = s[i++];
        if (c == '\n') ++line;
        return c;
    }
};

// One logical record; returns false at end of input.
bool parse_record(Cursor& cur, std::vector<std::string>& fields, long& start_line) {
    fields.clear();
    // skip blank trailing lines
    while (!cur.done() && (cur.peek() == '\n' || cur.peek() == '\r')) cur.take();
    if (cur.done()) return false;
    start_line = cur.line;

    std::string field;
    bool quoted = false;
    while (true) {
        if (cur.done()) {
            fields.push_back(field);
            if (quoted) throw ParseError("unterminated quoted field", start_line);
            return true;
        }
        char c = cur.take();
        if (quoted) {
            if (c == '"') {
                if (!cur.done() && cur.peek() == '"') {
                    field += cur.take();
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else {
            if (c == '"' && field.empty()) {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(field);
                field.clear();
            } else if (c == '\r') {
                // swallow; newline follows in \r\n
            } else if (c == '\n') {
                fields.push_back(field);
                return true;
            } else {
                field += c;
            }
        }
    }
}

}  // namespace

Table parse(const std::string& content) {
    Table t;
    Cursor cur{content};
    std::vector<std::string> fields;
    long line = 0;
    if (!parse_record(cur, fields, line)) throw ParseError("empty CSV: header row required");
    t.header = fields;
    while (parse_record(cur, fields, line)) {
        if (fields.size() != t.header.size())
            throw ParseError("row has " + std::to_string(fields.size()) + " fields, header has " +
                                 std::to_string(t.header.size()),
                             line);
        t.rows.push_back(fields);
        t.row_lines.push_back(line);
    }
    return t;
}

Table parse_file(const std::string& path) { return parse(read_file(path)); }

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string to_line(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += escape(fields[i]);
    }
    out += '\n';
    return out;
}

}  // namespace im::csv
