#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ibrag {

// Log-probability of `continuation` conditioned on `prompt`. Scoring only,
// never sampling.
struct ScoreRequest {
    std::string prompt;
    std::string continuation;
};

struct TokenScores {
    std::vector<std::string> tokens;
    std::vector<double> logprobs; // natural log, each <= 0

    double total() const;
    std::size_t size() const { return tokens.size(); }
};

class Backend {
public:
    virtual ~Backend() = default;

    // Thread-safe; deterministic for fixed inputs.
    virtual TokenScores score(const ScoreRequest& request) const = 0;
    virtual std::string name() const = 0;
};

struct MockOptions {
    enum class Mode {
        hash,     // p(token) from a stable hash of (token, position, seed)
        constant, // fixed per-token probability
        echo,     // p depends on whether the token also occurs in the prompt
    };

    Mode mode = Mode::hash;
    std::uint64_t seed = 0;
    double constant_p = 0.5;
    double hash_min_p = 0.2;
    double hash_max_p = 0.95;
    double echo_hit_p = 0.9;
    double echo_miss_p = 0.3;
};

// Deterministic offline stand-in for a scoring LM. Tokenizes the
// continuation into whitespace-prefixed word tokens whose concatenation
// reproduces the input exactly. Uses no platform-dependent hashing, so
// outputs are stable across runs and machines.
class MockBackend : public Backend {
public:
    explicit MockBackend(MockOptions options = {});

    TokenScores score(const ScoreRequest& request) const override;
    std::string name() const override;

    const MockOptions& options() const { return options_; }

    static std::vector<std::string> tokenize(std::string_view text);

private:
    MockOptions options_;
};

struct BackendConfig {
    std::string kind = "mock"; // mock | http | openai
    std::string base_url;
    std::string model;
    int max_in_flight = 4;
    double timeout_s = 30.0;
    int retries = 2;
    MockOptions mock;
};

std::shared_ptr<Backend> make_backend(const BackendConfig& config);

struct ScoreOutcome {
    std::optional<TokenScores> scores;
    std::string error;

    bool ok() const { return scores.has_value(); }
};

// Front door for scoring. Validates requests, owns batch fan-out with at
// most max_in_flight requests outstanding.
class LmGateway {
public:
    explicit LmGateway(std::shared_ptr<Backend> backend, int max_in_flight = 4);

    TokenScores score(const ScoreRequest& request) const;
    std::vector<ScoreOutcome> score_batch(std::span<const ScoreRequest> requests) const;

    const Backend& backend() const { return *backend_; }
    int max_in_flight() const { return max_in_flight_; }

private:
    std::shared_ptr<Backend> backend_;
    int max_in_flight_;
};

} // namespace ibrag
