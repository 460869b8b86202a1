#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

namespace ibrag {

struct Passage {
    std::string title;
    std::string text;
    int rank = 0;
};

// One QA instance: question q, gold answers y (any alias counts), and the
// pre-retrieved passages x in ascending retriever-rank order.
struct QARecord {
    std::string id;
    std::string question;
    std::vector<std::string> answers;
    std::vector<Passage> passages;
    std::vector<std::string> supporting_facts; // multi-hop intermediate answers
    bool has_supporting_facts = false;         // distinguishes [] from absent
    nlohmann::ordered_json extra;              // unknown input fields, kept for round-trip

    // Passages rendered as "{title}"\n{text}, joined by blank lines.
    std::string context_text() const;
};

// Character spans into a source string. Spans are trimmed to non-whitespace
// content, non-overlapping and ordered; every sentence lies inside exactly
// one paragraph.
struct Segmentation {
    struct Span {
        std::size_t begin = 0;
        std::size_t end = 0; // one past the last character

        std::string_view slice(std::string_view source) const {
            return source.substr(begin, end - begin);
        }
        bool operator==(const Span&) const = default;
    };

    std::vector<Span> paragraphs;
    std::vector<Span> sentences;
};

// Abbreviations that suppress a sentence break after their trailing period.
// Entries are stored lowercase without the final period ("mr", "e.g").
class AbbrevSet {
public:
    static const AbbrevSet& builtin();
    static AbbrevSet from_file(const std::filesystem::path& path);

    void insert(std::string_view token);
    bool contains(std::string_view token_without_final_period) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::unordered_set<std::string> entries_;
};

Segmentation segment(std::string_view text);
Segmentation segment(std::string_view text, const AbbrevSet& abbreviations);

// Whitespace-delimited token count.
std::size_t word_count(std::string_view text);

// Parses and validates one JSONL record. `line` is used in error messages.
QARecord record_from_json(const nlohmann::ordered_json& j, int top_k, std::size_t line);
nlohmann::ordered_json record_to_json(const QARecord& record);

// Streaming single-reader over a JSONL corpus file. Throws SchemaError with
// the offending line and field; IoError if the file cannot be opened.
class RecordReader {
public:
    explicit RecordReader(const std::filesystem::path& path, int top_k = 5);

    std::optional<QARecord> next();
    std::size_t line_number() const { return line_; }

private:
    std::ifstream in_;
    std::filesystem::path path_;
    int top_k_;
    std::size_t line_ = 0;
};

std::vector<QARecord> load_records(const std::filesystem::path& path, int top_k = 5);

} // namespace ibrag
