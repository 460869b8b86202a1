#include "ibrag/corpus.hpp"

#include <algorithm>
#include <cctype>

#include "ibrag/errors.hpp"

namespace ibrag {

namespace {

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

std::string_view trim_view(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

// Default stop-list; data/abbreviations.txt ships the same entries.
constexpr const char* kBuiltinAbbreviations[] = {
    "mr", "mrs", "ms", "dr", "prof", "rev", "hon", "st", "jr", "sr",
    "gen", "col", "capt", "lt", "sgt", "cmdr", "gov", "sen", "rep", "det",
    "vs", "etc", "e.g", "i.e", "cf", "al", "ca", "approx", "fig", "no",
    "nos", "vol", "pp", "ed", "eds", "inc", "ltd", "co", "corp", "dept",
    "univ", "assn", "bros", "jan", "feb", "mar", "apr", "jun", "jul", "aug",
    "sep", "sept", "oct", "nov", "dec", "mon", "tue", "wed", "thu", "fri",
    "sat", "sun", "mt", "ft", "rd", "ave", "blvd", "hwy", "u.s", "u.k",
    "u.n", "e.u", "d.c", "a.m", "p.m", "a.d", "b.c",
};

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closing(char c) {
    return c == '"' || c == '\'' || c == ')' || c == ']';
}

bool is_opening(char c) {
    return c == '"' || c == '\'' || c == '(' || c == '[' || c == '`';
}

} // namespace

std::string QARecord::context_text() const {
    std::string out;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += '"';
        out += passages[i].title;
        out += "\"\n";
        out += passages[i].text;
    }
    return out;
}

const AbbrevSet& AbbrevSet::builtin() {
    static const AbbrevSet set = [] {
        AbbrevSet s;
        for (const char* a : kBuiltinAbbreviations) s.insert(a);
        return s;
    }();
    return set;
}

AbbrevSet AbbrevSet::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open abbreviation list: " + path.string());
    AbbrevSet set;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view v = trim_view(line);
        if (v.empty() || v.front() == '#') continue;
        set.insert(v);
    }
    return set;
}

void AbbrevSet::insert(std::string_view token) {
    std::string t = lowercase(trim_view(token));
    if (!t.empty() && t.back() == '.') t.pop_back();
    if (!t.empty()) entries_.insert(std::move(t));
}

bool AbbrevSet::contains(std::string_view token) const {
    return entries_.count(lowercase(token)) > 0;
}

namespace {

// True when the '.' at `dot` ends an abbreviation or a single-initial and
// must not break the sentence.
bool suppressed_period(std::string_view text, std::size_t dot, const AbbrevSet& abbreviations) {
    std::size_t ts = dot;
    while (ts > 0 && !is_space(text[ts - 1])) --ts;
    std::string_view token = text.substr(ts, dot - ts);
    // strip leading quotes/brackets so '"Mr.' is still recognized
    while (!token.empty() && !std::isalnum(static_cast<unsigned char>(token.front()))) {
        token.remove_prefix(1);
    }
    if (token.empty()) return false;
    if (token.size() == 1 && std::isupper(static_cast<unsigned char>(token.front()))) {
        return true; // initials: "J. K. Rowling"
    }
    return abbreviations.contains(token);
}

void split_sentences(std::string_view text, Segmentation::Span paragraph,
                     const AbbrevSet& abbreviations, std::vector<Segmentation::Span>& out) {
    std::size_t start = paragraph.begin;
    std::size_t i = paragraph.begin;
    while (i < paragraph.end) {
        if (!is_terminal(text[i])) {
            ++i;
            continue;
        }
        std::size_t tail = i + 1;
        while (tail < paragraph.end && is_closing(text[tail])) ++tail;
        std::size_t next = tail;
        while (next < paragraph.end && is_space(text[next])) ++next;
        bool breaks = next > tail && next < paragraph.end &&
                      (std::isupper(static_cast<unsigned char>(text[next])) || is_opening(text[next]));
        if (breaks && text[i] == '.' && suppressed_period(text, i, abbreviations)) {
            breaks = false;
        }
        if (breaks) {
            std::string_view sent = trim_view(text.substr(start, tail - start));
            if (!sent.empty()) {
                std::size_t b = start + static_cast<std::size_t>(sent.data() - text.substr(start).data());
                out.push_back({b, b + sent.size()});
            }
            start = next;
            i = next;
        } else {
            i = tail;
        }
    }
    std::string_view sent = trim_view(text.substr(start, paragraph.end - start));
    if (!sent.empty()) {
        std::size_t b = start + static_cast<std::size_t>(sent.data() - text.substr(start).data());
        out.push_back({b, b + sent.size()});
    }
}

} // namespace

Segmentation segment(std::string_view text) {
    return segment(text, AbbrevSet::builtin());
}

Segmentation segment(std::string_view text, const AbbrevSet& abbreviations) {
    Segmentation seg;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && is_space(text[pos])) ++pos;
        if (pos >= text.size()) break;
        // paragraph runs to the next blank line (a newline followed, after
        // horizontal whitespace, by another newline) or end of text
        std::size_t end = pos;
        while (end < text.size()) {
            if (text[end] == '\n') {
                std::size_t k = end + 1;
                while (k < text.size() && (text[k] == ' ' || text[k] == '\t' || text[k] == '\r')) ++k;
                if (k < text.size() && text[k] == '\n') break;
                if (k >= text.size()) break;
            }
            ++end;
        }
        std::string_view para = trim_view(text.substr(pos, end - pos));
        if (!para.empty()) {
            std::size_t b = pos + static_cast<std::size_t>(para.data() - text.substr(pos).data());
            Segmentation::Span span{b, b + para.size()};
            seg.paragraphs.push_back(span);
            split_sentences(text, span, abbreviations, seg.sentences);
        }
        pos = end + 1;
    }
    return seg;
}

std::size_t word_count(std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++n;
        }
    }
    return n;
}

namespace {

const nlohmann::ordered_json& require_field(const nlohmann::ordered_json& j,
                                            const std::string& name, std::size_t line) {
    auto it = j.find(name);
    if (it == j.end()) throw SchemaError(line, name, "missing");
    return *it;
}

std::string require_string(const nlohmann::ordered_json& j, const std::string& name,
                           std::size_t line) {
    const auto& v = require_field(j, name, line);
    if (!v.is_string()) throw SchemaError(line, name, "expected a string");
    return v.get<std::string>();
}

} // namespace

QARecord record_from_json(const nlohmann::ordered_json& j, int top_k, std::size_t line) {
    if (!j.is_object()) throw SchemaError(line, "<record>", "expected a JSON object");

    QARecord rec;
    rec.id = require_string(j, "id", line);
    rec.question = require_string(j, "question", line);

    const auto& answers = require_field(j, "answers", line);
    if (!answers.is_array() || answers.empty()) {
        throw SchemaError(line, "answers", "expected a non-empty array");
    }
    for (const auto& a : answers) {
        if (!a.is_string()) throw SchemaError(line, "answers", "expected strings");
        std::string s = a.get<std::string>();
        if (trim_view(s).empty()) throw SchemaError(line, "answers", "answer is empty");
        rec.answers.push_back(std::move(s));
    }

    const auto& passages = require_field(j, "passages", line);
    if (!passages.is_array()) throw SchemaError(line, "passages", "expected an array");
    int prev_rank = 0;
    std::size_t idx = 0;
    for (const auto& p : passages) {
        std::string at = "passages[" + std::to_string(idx) + "]";
        if (!p.is_object()) throw SchemaError(line, at, "expected an object");
        Passage pass;
        auto title = p.find("title");
        if (title == p.end() || !title->is_string()) throw SchemaError(line, at + ".title", "expected a string");
        pass.title = title->get<std::string>();
        auto text = p.find("text");
        if (text == p.end() || !text->is_string()) throw SchemaError(line, at + ".text", "expected a string");
        pass.text = text->get<std::string>();
        if (pass.text.empty()) throw SchemaError(line, at + ".text", "passage text is empty");
        auto rank = p.find("rank");
        if (rank == p.end() || !rank->is_number_integer()) throw SchemaError(line, at + ".rank", "expected an integer");
        pass.rank = rank->get<int>();
        if (pass.rank <= 0) throw SchemaError(line, at + ".rank", "rank must be positive");
        if (pass.rank <= prev_rank) {
            throw SchemaError(line, at + ".rank", "ranks must be strictly ascending");
        }
        prev_rank = pass.rank;
        ++idx;
        if (static_cast<int>(rec.passages.size()) < top_k) rec.passages.push_back(std::move(pass));
    }

    if (auto sf = j.find("supporting_facts"); sf != j.end()) {
        if (!sf->is_array()) throw SchemaError(line, "supporting_facts", "expected an array");
        rec.has_supporting_facts = true;
        for (const auto& f : *sf) {
            if (!f.is_string()) throw SchemaError(line, "supporting_facts", "expected strings");
            rec.supporting_facts.push_back(f.get<std::string>());
        }
    }

    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        if (key == "id" || key == "question" || key == "answers" || key == "passages" ||
            key == "supporting_facts") {
            continue;
        }
        rec.extra[key] = it.value();
    }
    return rec;
}

nlohmann::ordered_json record_to_json(const QARecord& record) {
    nlohmann::ordered_json j;
    j["id"] = record.id;
    j["question"] = record.question;
    j["answers"] = record.answers;
    auto passages = nlohmann::ordered_json::array();
    for (const auto& p : record.passages) {
        passages.push_back({{"title", p.title}, {"text", p.text}, {"rank", p.rank}});
    }
    j["passages"] = std::move(passages);
    if (record.has_supporting_facts) j["supporting_facts"] = record.supporting_facts;
    if (record.extra.is_object()) {
        for (auto it = record.extra.begin(); it != record.extra.end(); ++it) {
            j[it.key()] = it.value();
        }
    }
    return j;
}

RecordReader::RecordReader(const std::filesystem::path& path, int top_k)
    : in_(path), path_(path), top_k_(top_k) {
    if (top_k < 1) throw ConfigError("top_k must be positive");
    if (!in_) throw IoError("cannot open corpus file: " + path.string());
}

std::optional<QARecord> RecordReader::next() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (trim_view(line).empty()) continue;
        nlohmann::ordered_json j;
        try {
            j = nlohmann::ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(line_, "<json>", e.what());
        }
        return record_from_json(j, top_k_, line_);
    }
    if (in_.bad()) throw IoError("read failure on corpus file: " + path_.string());
    return std::nullopt;
}

std::vector<QARecord> load_records(const std::filesystem::path& path, int top_k) {
    RecordReader reader(path, top_k);
    std::vector<QARecord> records;
    while (auto rec = reader.next()) records.push_back(std::move(*rec));
    return records;
}

} // namespace ibrag
