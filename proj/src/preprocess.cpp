#include "intent_miner/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <regex>
#include <set>

#include "intent_miner/errors.hpp"
#include "intent_miner/util.hpp"

namespace im {

namespace {

constexpr std::size_t kMaxTokenLen = 30;
constexpr std::size_t kPatternMinTokens = 4;

const std::regex kUrlRe(R"((https?://|www\.)[^\s]+)");
const std::regex kTagRe(R"(<[^<>]*>)");
const std::regex kEmailRe(R"([^\s@]+@[^\s@]+)");

bool has_vowel(const std::string& s) {
    return s.find_first_of("aeiou") != std::string::npos;
}

bool is_consonant(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) && std::string("aeiou").find(c) == std::string::npos;
}

bool ends_with(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

// drop one of a trailing doubled consonant: shipp -> ship
std::string undouble(std::string stem) {
    std::size_t n = stem.size();
    if (n >= 3 && stem[n - 1] == stem[n - 2] && is_consonant(stem[n - 1]) &&
        stem[n - 1] != 'l' && stem[n - 1] != 's' && stem[n - 1] != 'z')
        stem.pop_back();
    return stem;
}

}  // namespace

Lexicon Lexicon::load(const std::string& data_dir) {
    Lexicon lex;
    for (const auto& line : split(read_file(data_dir + "/stopwords.txt"), '\n')) {
        std::string w = trim(line);
        if (!w.empty() && w[0] != '#') lex.stopwords_.insert(w);
    }
    for (const auto& line : split(read_file(data_dir + "/lemma_exceptions.txt"), '\n')) {
        std::string entry = trim(line);
        if (entry.empty() || entry[0] == '#') continue;
        std::size_t sp = entry.find(' ');
        if (sp == std::string::npos)
            throw ParseError("lemma exception entry needs two fields: " + entry);
        lex.exceptions_[trim(entry.substr(0, sp))] = trim(entry.substr(sp + 1));
    }
    if (lex.stopwords_.empty()) throw ValidationError("stopword list is empty: " + data_dir);
    return lex;
}

const Lexicon& Lexicon::builtin() {
    static const Lexicon lex = [] {
        const char* env = std::getenv("INTENT_MINER_DATA");
        return load(env ? env : INTENT_MINER_DATA_DIR);
    }();
    return lex;
}

std::string Lexicon::lemma_exception(const std::string& w) const {
    auto it = exceptions_.find(w);
    return it == exceptions_.end() ? std::string() : it->second;
}

std::string normalize(const std::string& raw) {
    std::string text;
    text.reserve(raw.size());
    for (char c : raw)
        text += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    text = std::regex_replace(text, kUrlRe, " ");
    // nested/overlapping tags can expose a new tag after one removal pass
    for (;;) {
        std::string next = std::regex_replace(text, kTagRe, " ");
        if (next == text) break;
        text = std::move(next);
    }
    text = std::regex_replace(text, kEmailRe, " ");

    std::vector<std::string> lines;
    for (const auto& rawline : split(text, '\n')) {
        std::string cleaned;
        for (char c : rawline) {
            unsigned char u = static_cast<unsigned char>(c);
            if (u >= 128 || u < 32) continue;  // non-ASCII and control bytes
            cleaned += c;
        }
        std::vector<std::string> chunks;
        for (const auto& chunk : split(cleaned, ' ')) {
            std::string tok = trim(chunk);
            if (tok.empty() || tok.size() > kMaxTokenLen) continue;
            chunks.push_back(tok);
        }
        if (!chunks.empty()) lines.push_back(join(chunks, " "));
    }
    return join(lines, "\n");
}

PatternLibrary mine_patterns(const TicketCollection& collection, double min_doc_frequency) {
    if (collection.tickets.empty()) throw ValidationError("mine_patterns: empty collection");
    if (min_doc_frequency <= 0.0 || min_doc_frequency > 1.0)
        throw ValidationError("min_doc_frequency must be in (0,1]");

    std::map<std::string, std::size_t> doc_freq;
    for (const auto& t : collection.tickets) {
        std::set<std::string> lines;
        for (const auto& line : split(normalize(t.body), '\n'))
            if (tokenize(line).size() >= kPatternMinTokens) lines.insert(line);
        for (const auto& line : lines) ++doc_freq[line];
    }

    const double n = static_cast<double>(collection.tickets.size());
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [line, df] : doc_freq)
        if (static_cast<double>(df) / n >= min_doc_frequency) kept.emplace_back(line, df);
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    PatternLibrary lib;
    lib.min_doc_frequency = min_doc_frequency;
    for (auto& [line, df] : kept) lib.patterns.push_back(std::move(line));
    return lib;
}

std::string strip_patterns(const std::string& text, const PatternLibrary& lib) {
    if (lib.patterns.empty()) return text;
    std::set<std::string> pats(lib.patterns.begin(), lib.patterns.end());
    std::vector<std::string> kept;
    for (const auto& line : split(text, '\n'))
        if (!pats.count(line)) kept.push_back(line);
    return join(kept, "\n");
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += c;
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        std::string s = trim(cur);
        if (!s.empty()) out.push_back(std::move(s));
        cur.clear();
    };
    for (char c : text) {
        if (c == '.' || c == '?' || c == '!' || c == ';' || c == '\n')
            flush();
        else
            cur += c;
    }
    flush();
    return out;
}

std::vector<std::string> remove_stopwords(const std::vector<std::string>& tokens,
                                          const Lexicon& lex) {
    std::vector<std::string> out;
    for (const auto& t : tokens)
        if (!lex.is_stopword(t)) out.push_back(t);
    return out;
}

std::string lemmatize_word(const std::string& word, const Lexicon& lex) {
    std::string exc = lex.lemma_exception(word);
    if (!exc.empty()) return exc;

    const std::size_t n = word.size();
    if (n >= 5 && ends_with(word, "ies"))
        return word.substr(0, n - 3) + "y";
    if (n >= 4 && ends_with(word, "es")) {
        std::string stem = word.substr(0, n - 2);
        if (ends_with(stem, "s") || ends_with(stem, "x") || ends_with(stem, "z") ||
            ends_with(stem, "ch") || ends_with(stem, "sh") || ends_with(stem, "o"))
            return stem;
        return word.substr(0, n - 1);  // plain plural: drop the s
    }
    if (n >= 4 && ends_with(word, "s") && !ends_with(word, "ss") && !ends_with(word, "us") &&
        !ends_with(word, "is"))
        return word.substr(0, n - 1);
    if (n >= 6 && ends_with(word, "ing")) {
        std::string stem = undouble(word.substr(0, n - 3));
        if (has_vowel(stem)) return stem;
    }
    if (n >= 5 && ends_with(word, "ed")) {
        std::string stem = undouble(word.substr(0, n - 2));
        if (has_vowel(stem)) return stem;
    }
    return word;
}

std::vector<std::string> lemmatize(const std::vector<std::string>& tokens, const Lexicon& lex) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(lemmatize_word(t, lex));
    return out;
}

PatternLibrary load_pattern_library(const std::string& path) {
    PatternLibrary lib;
    for (const auto& line : split(read_file(path), '\n')) {
        std::string p = trim(line);
        if (p.empty() || p[0] == '#') continue;
        lib.patterns.push_back(p);
    }
    return lib;
}

void save_pattern_library(const PatternLibrary& lib, const std::string& path) {
    std::string out = "# pattern library: one normalized boilerplate line per entry\n";
    for (const auto& p : lib.patterns) out += p + "\n";
    write_file(path, out);
}

std::vector<std::string> topic_tokens(const std::string& text, const Lexicon& lex) {
    return lemmatize(remove_stopwords(tokenize(normalize(text)), lex), lex);
}

ProcessedTicket run_pipeline(const Ticket& ticket, PipelineMode mode, const PatternLibrary& lib,
                             const Lexicon& lex) {
    std::string text;
    if (ticket.subject && !ticket.subject->empty()) text = *ticket.subject + "\n";
    text += ticket.body;
    text = strip_patterns(normalize(text), lib);

    ProcessedTicket out;
    if (mode == PipelineMode::Embedding) {
        out.tokens = tokenize(text);
        return out;
    }
    for (const auto& sent : split_sentences(text)) {
        auto toks = lemmatize(remove_stopwords(tokenize(sent), lex), lex);
        if (toks.empty()) continue;
        for (const auto& t : toks) out.tokens.push_back(t);
        out.sentences.push_back(std::move(toks));
    }
    return out;
}

}  // namespace im
