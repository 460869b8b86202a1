#pragma once

#include <string>

#include "ibrag/corpus.hpp"
#include "ibrag/lm_gateway.hpp"

namespace ibrag {

struct IbConfig {
    double alpha = 10.0; // weight on the answer term
    double beta = 2.0;   // reported in metadata only; must stay > 1
    std::string conciseness_prompt; // empty -> built-in default
    std::string correctness_prompt;

    void validate() const;
    const std::string& conciseness_template() const;
    const std::string& correctness_template() const;
};

// Score of one candidate compression. value = conciseness - alpha *
// correctness, always in [-alpha, 1]; smaller is better.
struct IbScore {
    double conciseness = 0.0; // geometric-mean p of reconstructing the context
    double correctness = 0.0; // geometric-mean p of the gold answer, max over aliases
    double value = 0.0;
    bool discard = false;
};

// Per-token geometric-mean probability, exp(mean logprob). Accumulates in
// long double so constant-probability sequences stay bit-exact at any length.
double normalized_seq_prob(const TokenScores& scores);

IbScore ib_score(const QARecord& record, const std::string& compression, const IbConfig& cfg,
                 const LmGateway& conciseness_gateway, const LmGateway& correctness_gateway);

inline IbScore ib_score(const QARecord& record, const std::string& compression,
                        const IbConfig& cfg, const LmGateway& gateway) {
    return ib_score(record, compression, cfg, gateway, gateway);
}

IbScore ib_empty(const QARecord& record, const IbConfig& cfg,
                 const LmGateway& conciseness_gateway, const LmGateway& correctness_gateway);

inline IbScore ib_empty(const QARecord& record, const IbConfig& cfg, const LmGateway& gateway) {
    return ib_empty(record, cfg, gateway, gateway);
}

// True iff the empty compression scores strictly better (lower); a tie keeps
// the candidate.
bool discard_verdict(const IbScore& candidate, const IbScore& empty);

double ib_reward(const IbScore& score);

} // namespace ibrag
