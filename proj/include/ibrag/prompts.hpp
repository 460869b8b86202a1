#pragma once

#include <map>
#include <string>
#include <string_view>

namespace ibrag {

// Scoring prompt for the reconstruct-the-context term. The continuation is
// the full passage text; the conditioning sections are labeled in the order
// question, excerpt, answer.
inline constexpr std::string_view kConcisenessTemplate =
    "Question: {question}\n"
    "Excerpt: {excerpt}\n"
    "Answer: {answer}\n"
    "Context:\n";

// Scoring prompt for the answer term. The continuation is a gold answer.
inline constexpr std::string_view kCorrectnessTemplate =
    "Question: {question}\n"
    "Excerpt: {excerpt}\n"
    "Answer:\n";

// Instruction-tuned filter prompt used when emitting SFT data.
inline constexpr std::string_view kFilterPromptTemplate =
    "[INST]\n"
    "<<SYS>>\n"
    "You are now an intelligent assessment assistant. Your task is to read the context "
    "and then find coherent excerpts that can effectively answer the given question."
    "After generating the answer, you need to determine whether the generated excerpt "
    "contributes to addressing the question.\n"
    "<</SYS>>\n"
    "Question: {question}\n"
    "Context:\n"
    "{context}\n"
    "[/INST]\n";

inline constexpr std::string_view kFilterCompletionTemplate =
    "Question: {question}\n"
    "Excerpt: {excerpt}\n"
    "Contribution: [{contribution}]\n";

// Few-shot generator prompt, shipped for downstream answer generation.
inline constexpr std::string_view kGeneratorPromptTemplate =
    "[INST]\n"
    "<<SYS>>\n"
    "You are a helpful, respectful and honest assistant. Your task is to predict the "
    "answer to the question based on the given context. If you don't know the answer "
    "to a question, please don't share false information. Answer the question as "
    "accurately as possible and put the answer in the form [answer].\n"
    "\n"
    "Here is an example:\n"
    "Question: Who was the first person killed in a car accident?\n"
    "Answer: [Bridget Driscoll]\n"
    "\n"
    "Question: Are both The New Pornographers and Kings of Leon American rock bands?\n"
    "Answer: [no]\n"
    "\n"
    "Question: What is the length of the track where the 2013 Liqui Moly Bathurst 12 "
    "Hour was staged?\n"
    "Answer: [6.213 km long]\n"
    "\n"
    "Question: Which was the first European country to abolish capital punishment?\n"
    "Answer: [Norway]\n"
    "\n"
    "(END OF EXAMPLE)\n"
    "<</SYS>>\n"
    "Given the ['question', 'context'], predict the answer to the question.\n"
    "\n"
    "Question: {question}\n"
    "Context:\n"
    "{context}\n"
    "\n"
    "[/INST]\n"
    "Answer: [";

enum class DropEmptyLines { no, yes };

// Substitutes {name} placeholders. With DropEmptyLines::yes, a line whose
// placeholder expands to the empty string is removed entirely, so an absent
// excerpt leaves no dangling label.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& subs,
                            DropEmptyLines drop = DropEmptyLines::no);

} // namespace ibrag
