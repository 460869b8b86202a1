#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ibrag/corpus.hpp"

namespace ibrag {

enum class MinerMethod {
    exact_paragraph,
    exact_sentence,
    greedy_qa,
    greedy_answer,
    external,
};

std::string_view method_name(MinerMethod method);
MinerMethod method_from_name(std::string_view name);

// A candidate filtered context. For extractive candidates, text is the
// space-joined concatenation of the source span substrings, in document
// order. External candidates may be abstractive (extractive=false, no spans).
struct Compression {
    struct SpanRef {
        std::size_t begin = 0;
        std::size_t end = 0;
        bool operator==(const SpanRef&) const = default;
    };

    std::string text;
    MinerMethod method = MinerMethod::external;
    std::vector<SpanRef> source_spans;
    bool extractive = true;
    std::string label; // provenance tag for external candidates

    bool empty() const { return text.empty(); }
    std::string method_label() const;

    static Compression none(); // the empty compression
};

enum class RougeVariant { rouge1, rouge2, rougeL };

std::string_view rouge_variant_name(RougeVariant variant);
RougeVariant rouge_variant_from_name(std::string_view name);

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    RougeVariant variant = RougeVariant::rouge1;
};

// Lowercase, strip punctuation, split on whitespace, drop {a, an, the}.
// Shared by ROUGE, exact-search matching, and the QA metrics.
std::vector<std::string> normalize_tokens(std::string_view text);

RougeScore rouge(std::string_view candidate, std::string_view reference, RougeVariant variant);
RougeScore rouge_tokens(const std::vector<std::string>& candidate,
                        const std::vector<std::string>& reference, RougeVariant variant);

enum class SegmentLevel { paragraph, sentence };

// All segments (document order) whose normalized tokens contain some gold
// answer's normalized tokens as a contiguous run. Empty when nothing matches.
Compression exact_search(const QARecord& record, SegmentLevel level);

enum class SilverReference {
    query_and_answer,
    answer_only,
    qa_with_supporting_facts,
    sf_and_answer,
};

std::string_view silver_reference_name(SilverReference silver);

// Sentence-level greedy oracle: repeatedly add the sentence that maximally
// increases rouge(selected, reference).f1, stopping at the first step with
// no strict gain. Ties go to the lower sentence index.
Compression greedy_oracle(const QARecord& record, SilverReference silver,
                          RougeVariant variant = RougeVariant::rouge1);

struct GreedyTrace {
    Compression compression;
    std::vector<std::size_t> picked;  // sentence indices in pick order
    std::vector<double> f1_steps;     // f1 after each pick, strictly increasing
};

GreedyTrace greedy_oracle_trace(const QARecord& record, SilverReference silver,
                                RougeVariant variant = RougeVariant::rouge1);

// External candidate JSONL: {"id": str, "method": str, "compression": str}.
// Duplicate (id, method) entries are kept in file order.
std::map<std::string, std::vector<Compression>>
load_external_candidates(const std::filesystem::path& path);

} // namespace ibrag
