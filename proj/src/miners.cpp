#include "ibrag/miners.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

#include "ibrag/errors.hpp"

namespace ibrag {

std::string_view method_name(MinerMethod method) {
    switch (method) {
        case MinerMethod::exact_paragraph: return "exact_paragraph";
        case MinerMethod::exact_sentence: return "exact_sentence";
        case MinerMethod::greedy_qa: return "greedy_qa";
        case MinerMethod::greedy_answer: return "greedy_answer";
        case MinerMethod::external: return "external";
    }
    return "external";
}

MinerMethod method_from_name(std::string_view name) {
    if (name == "exact_paragraph") return MinerMethod::exact_paragraph;
    if (name == "exact_sentence") return MinerMethod::exact_sentence;
    if (name == "greedy_qa") return MinerMethod::greedy_qa;
    if (name == "greedy_answer") return MinerMethod::greedy_answer;
    if (name == "external") return MinerMethod::external;
    throw ConfigError("unknown miner method: " + std::string(name));
}

std::string Compression::method_label() const {
    if (method == MinerMethod::external && !label.empty()) return label;
    return std::string(method_name(method));
}

Compression Compression::none() {
    Compression c;
    c.method = MinerMethod::external;
    c.label = "empty";
    return c;
}

std::string_view rouge_variant_name(RougeVariant variant) {
    switch (variant) {
        case RougeVariant::rouge1: return "rouge1";
        case RougeVariant::rouge2: return "rouge2";
        case RougeVariant::rougeL: return "rougeL";
    }
    return "rouge1";
}

RougeVariant rouge_variant_from_name(std::string_view name) {
    if (name == "rouge1") return RougeVariant::rouge1;
    if (name == "rouge2") return RougeVariant::rouge2;
    if (name == "rougeL" || name == "rougel") return RougeVariant::rougeL;
    throw ConfigError("unknown rouge variant: " + std::string(name));
}

std::string_view silver_reference_name(SilverReference silver) {
    switch (silver) {
        case SilverReference::query_and_answer: return "query_and_answer";
        case SilverReference::answer_only: return "answer_only";
        case SilverReference::qa_with_supporting_facts: return "qa_with_supporting_facts";
        case SilverReference::sf_and_answer: return "sf_and_answer";
    }
    return "answer_only";
}

std::vector<std::string> normalize_tokens(std::string_view text) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (char c : text) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::ispunct(u)) continue;
        cleaned += static_cast<char>(std::tolower(u));
    }
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < cleaned.size()) {
        while (i < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[i]))) ++i;
        std::size_t b = i;
        while (i < cleaned.size() && !std::isspace(static_cast<unsigned char>(cleaned[i]))) ++i;
        if (i > b) {
            std::string tok = cleaned.substr(b, i - b);
            if (tok != "a" && tok != "an" && tok != "the") tokens.push_back(std::move(tok));
        }
    }
    return tokens;
}

namespace {

constexpr char kGramSep = '\x1f';

std::unordered_map<std::string, int> ngram_counts(const std::vector<std::string>& tokens, int n) {
    std::unordered_map<std::string, int> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int k = 1; k < n; ++k) {
            key += kGramSep;
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) {
                cur[j] = prev[j - 1] + 1;
            } else {
                cur[j] = std::max(prev[j], cur[j - 1]);
            }
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

RougeScore rouge_from_counts(double overlap, double cand_total, double ref_total,
                             RougeVariant variant) {
    RougeScore score;
    score.variant = variant;
    score.precision = cand_total > 0 ? overlap / cand_total : 0.0;
    score.recall = ref_total > 0 ? overlap / ref_total : 0.0;
    double pr = score.precision + score.recall;
    score.f1 = pr > 0 ? 2.0 * score.precision * score.recall / pr : 0.0;
    return score;
}

} // namespace

RougeScore rouge_tokens(const std::vector<std::string>& candidate,
                        const std::vector<std::string>& reference, RougeVariant variant) {
    if (variant == RougeVariant::rougeL) {
        double lcs = static_cast<double>(lcs_length(candidate, reference));
        return rouge_from_counts(lcs, static_cast<double>(candidate.size()),
                                 static_cast<double>(reference.size()), variant);
    }
    int n = variant == RougeVariant::rouge1 ? 1 : 2;
    auto cand = ngram_counts(candidate, n);
    auto ref = ngram_counts(reference, n);
    double overlap = 0;
    double cand_total = 0;
    double ref_total = 0;
    for (const auto& [gram, count] : cand) {
        cand_total += count;
        auto it = ref.find(gram);
        if (it != ref.end()) overlap += std::min(count, it->second);
    }
    for (const auto& [gram, count] : ref) ref_total += count;
    return rouge_from_counts(overlap, cand_total, ref_total, variant);
}

RougeScore rouge(std::string_view candidate, std::string_view reference, RougeVariant variant) {
    return rouge_tokens(normalize_tokens(candidate), normalize_tokens(reference), variant);
}

namespace {

bool contains_run(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) return true;
    }
    return false;
}

Compression from_spans(const std::string& context, std::vector<Compression::SpanRef> spans,
                       MinerMethod method) {
    Compression c;
    c.method = method;
    c.source_spans = std::move(spans);
    for (std::size_t i = 0; i < c.source_spans.size(); ++i) {
        if (i > 0) c.text += ' ';
        c.text += context.substr(c.source_spans[i].begin,
                                 c.source_spans[i].end - c.source_spans[i].begin);
    }
    return c;
}

} // namespace

Compression exact_search(const QARecord& record, SegmentLevel level) {
    std::string context = record.context_text();
    Segmentation seg = segment(context);
    const auto& spans = level == SegmentLevel::paragraph ? seg.paragraphs : seg.sentences;

    std::vector<std::vector<std::string>> answer_tokens;
    for (const auto& a : record.answers) {
        auto toks = normalize_tokens(a);
        if (!toks.empty()) answer_tokens.push_back(std::move(toks));
    }

    std::vector<Compression::SpanRef> hits;
    for (const auto& span : spans) {
        auto seg_tokens = normalize_tokens(span.slice(context));
        for (const auto& ans : answer_tokens) {
            if (contains_run(seg_tokens, ans)) {
                hits.push_back({span.begin, span.end});
                break;
            }
        }
    }
    MinerMethod method = level == SegmentLevel::paragraph ? MinerMethod::exact_paragraph
                                                          : MinerMethod::exact_sentence;
    return from_spans(context, std::move(hits), method);
}

namespace {

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += ' ';
        out += parts[i];
    }
    return out;
}

std::string silver_text(const QARecord& record, SilverReference silver) {
    bool needs_sf = silver == SilverReference::qa_with_supporting_facts ||
                    silver == SilverReference::sf_and_answer;
    if (needs_sf && !record.has_supporting_facts) {
        throw Error("record '" + record.id + "': silver reference '" +
                    std::string(silver_reference_name(silver)) +
                    "' requires supporting_facts");
    }
    std::string ref;
    if (silver == SilverReference::query_and_answer ||
        silver == SilverReference::qa_with_supporting_facts) {
        ref += record.question;
    }
    if (needs_sf) {
        if (!ref.empty()) ref += ' ';
        ref += join(record.supporting_facts);
    }
    if (!ref.empty()) ref += ' ';
    ref += join(record.answers);
    return ref;
}

MinerMethod greedy_method(SilverReference silver) {
    switch (silver) {
        case SilverReference::query_and_answer:
        case SilverReference::qa_with_supporting_facts:
            return MinerMethod::greedy_qa;
        case SilverReference::answer_only:
        case SilverReference::sf_and_answer:
            return MinerMethod::greedy_answer;
    }
    return MinerMethod::greedy_answer;
}

} // namespace

GreedyTrace greedy_oracle_trace(const QARecord& record, SilverReference silver,
                                RougeVariant variant) {
    std::string context = record.context_text();
    Segmentation seg = segment(context);
    auto reference = normalize_tokens(silver_text(record, silver));

    std::vector<std::vector<std::string>> sentence_tokens;
    sentence_tokens.reserve(seg.sentences.size());
    for (const auto& span : seg.sentences) {
        sentence_tokens.push_back(normalize_tokens(span.slice(context)));
    }

    GreedyTrace trace;
    std::vector<bool> selected(seg.sentences.size(), false);
    double current_f1 = 0.0;

    while (true) {
        double best_f1 = current_f1;
        std::size_t best = seg.sentences.size();
        for (std::size_t i = 0; i < seg.sentences.size(); ++i) {
            if (selected[i]) continue;
            std::vector<std::string> candidate;
            for (std::size_t k = 0; k < seg.sentences.size(); ++k) {
                if (selected[k] || k == i) {
                    candidate.insert(candidate.end(), sentence_tokens[k].begin(),
                                     sentence_tokens[k].end());
                }
            }
            double f1 = rouge_tokens(candidate, reference, variant).f1;
            if (f1 > best_f1) {
                best_f1 = f1;
                best = i;
            }
        }
        if (best == seg.sentences.size()) break;
        selected[best] = true;
        current_f1 = best_f1;
        trace.picked.push_back(best);
        trace.f1_steps.push_back(best_f1);
    }

    std::vector<Compression::SpanRef> spans;
    for (std::size_t i = 0; i < seg.sentences.size(); ++i) {
        if (selected[i]) spans.push_back({seg.sentences[i].begin, seg.sentences[i].end});
    }
    trace.compression = from_spans(context, std::move(spans), greedy_method(silver));
    return trace;
}

Compression greedy_oracle(const QARecord& record, SilverReference silver, RougeVariant variant) {
    return greedy_oracle_trace(record, silver, variant).compression;
}

std::map<std::string, std::vector<Compression>>
load_external_candidates(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open external candidates file: " + path.string());

    std::map<std::string, std::vector<Compression>> by_id;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        bool blank = true;
        for (char c : line) {
            if (!std::isspace(static_cast<unsigned char>(c))) { blank = false; break; }
        }
        if (blank) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError(line_no, "<json>", e.what());
        }
        if (!j.is_object()) throw SchemaError(line_no, "<record>", "expected a JSON object");
        auto id = j.find("id");
        if (id == j.end() || !id->is_string()) throw SchemaError(line_no, "id", "expected a string");
        auto method = j.find("method");
        if (method == j.end() || !method->is_string()) {
            throw SchemaError(line_no, "method", "expected a string");
        }
        auto text = j.find("compression");
        if (text == j.end() || !text->is_string()) {
            throw SchemaError(line_no, "compression", "expected a string");
        }
        Compression c;
        c.text = text->get<std::string>();
        c.method = MinerMethod::external;
        c.label = method->get<std::string>();
        c.extractive = false;
        by_id[id->get<std::string>()].push_back(std::move(c));
    }
    return by_id;
}

} // namespace ibrag
