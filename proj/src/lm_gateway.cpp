#include "ibrag/lm_gateway.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "ibrag/errors.hpp"

namespace ibrag {

double TokenScores::total() const {
    double sum = 0.0;
    for (double lp : logprobs) sum += lp;
    return sum;
}

namespace {

constexpr const char* kAuthTokenEnv = "IBRAG_LM_TOKEN";

// Platform-stable hashing; std::hash is implementation-defined and would
// break golden outputs across toolchains.
std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

double unit_from_hash(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

char ascii_lower(char c) {
    return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c;
}

bool ascii_alnum(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Lowercased alphanumeric core of a token, for echo-mode overlap lookups.
std::string bare_token(std::string_view token) {
    std::string out;
    for (char c : token) {
        if (ascii_alnum(c)) out += ascii_lower(c);
    }
    return out;
}

std::unordered_set<std::string> prompt_bag(std::string_view prompt) {
    std::unordered_set<std::string> bag;
    std::size_t i = 0;
    while (i < prompt.size()) {
        while (i < prompt.size() && std::isspace(static_cast<unsigned char>(prompt[i]))) ++i;
        std::size_t b = i;
        while (i < prompt.size() && !std::isspace(static_cast<unsigned char>(prompt[i]))) ++i;
        if (i > b) {
            std::string tok = bare_token(prompt.substr(b, i - b));
            if (!tok.empty()) bag.insert(std::move(tok));
        }
    }
    return bag;
}

void validate_probability(double p, const char* what) {
    if (!(p > 0.0) || p > 1.0) {
        throw ConfigError(std::string("mock backend: ") + what + " must be in (0, 1]");
    }
}

} // namespace

MockBackend::MockBackend(MockOptions options) : options_(options) {
    validate_probability(options_.constant_p, "constant_p");
    validate_probability(options_.hash_min_p, "hash_min_p");
    validate_probability(options_.hash_max_p, "hash_max_p");
    validate_probability(options_.echo_hit_p, "echo_hit_p");
    validate_probability(options_.echo_miss_p, "echo_miss_p");
    if (options_.hash_min_p > options_.hash_max_p) {
        throw ConfigError("mock backend: hash_min_p must not exceed hash_max_p");
    }
}

std::vector<std::string> MockBackend::tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t b = i;
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        tokens.emplace_back(text.substr(b, i - b));
    }
    // trailing pure-whitespace piece sticks to the previous token so the
    // concatenation reproduces the input
    if (tokens.size() >= 2 && !tokens.back().empty()) {
        std::string_view last = tokens.back();
        bool all_space = true;
        for (char c : last) {
            if (!std::isspace(static_cast<unsigned char>(c))) { all_space = false; break; }
        }
        if (all_space) {
            std::string tail = std::move(tokens.back());
            tokens.pop_back();
            tokens.back() += tail;
        }
    }
    return tokens;
}

TokenScores MockBackend::score(const ScoreRequest& request) const {
    TokenScores out;
    out.tokens = tokenize(request.continuation);

    std::unordered_set<std::string> bag;
    if (options_.mode == MockOptions::Mode::echo) bag = prompt_bag(request.prompt);

    out.logprobs.reserve(out.tokens.size());
    for (std::size_t pos = 0; pos < out.tokens.size(); ++pos) {
        double p = options_.constant_p;
        switch (options_.mode) {
            case MockOptions::Mode::constant:
                break;
            case MockOptions::Mode::hash: {
                std::uint64_t h = splitmix64(fnv1a64(out.tokens[pos]) ^
                                             splitmix64(options_.seed) ^
                                             splitmix64(pos * 0x9e3779b97f4a7c15ull));
                p = options_.hash_min_p +
                    (options_.hash_max_p - options_.hash_min_p) * unit_from_hash(h);
                break;
            }
            case MockOptions::Mode::echo: {
                std::string bare = bare_token(out.tokens[pos]);
                bool hit = !bare.empty() && bag.count(bare) > 0;
                p = hit ? options_.echo_hit_p : options_.echo_miss_p;
                break;
            }
        }
        out.logprobs.push_back(std::log(p));
    }
    return out;
}

std::string MockBackend::name() const {
    switch (options_.mode) {
        case MockOptions::Mode::constant: return "mock:constant";
        case MockOptions::Mode::hash: return "mock:hash";
        case MockOptions::Mode::echo: return "mock:echo";
    }
    return "mock";
}

namespace {

// Splits "http://host:port/base" into client root and path prefix.
struct UrlParts {
    std::string root;
    std::string prefix;
};

UrlParts split_url(const std::string& base_url) {
    auto scheme = base_url.find("://");
    std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
    auto slash = base_url.find('/', host_start);
    if (slash == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(slash);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, slash), prefix};
}

double sanitize_logprob(double lp, const char* backend) {
    if (lp > 1e-6) {
        throw BackendError(std::string(backend) + ": positive logprob in response");
    }
    return lp > 0.0 ? 0.0 : lp;
}

class HttpClientBase {
protected:
    HttpClientBase(const BackendConfig& config) : parts_(split_url(config.base_url)), config_(config) {}

    // POSTs with retry on connection failures and 5xx; 4xx is terminal.
    nlohmann::json post_json(const std::string& path, const nlohmann::json& body,
                             const httplib::Headers& headers) const {
        std::string payload = body.dump();
        std::string last_error;
        for (int attempt = 0; attempt <= config_.retries; ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(std::chrono::milliseconds(50 << (attempt - 1)));
            }
            httplib::Client client(parts_.root);
            client.set_connection_timeout(std::chrono::duration<double>(config_.timeout_s));
            client.set_read_timeout(std::chrono::duration<double>(config_.timeout_s));
            client.set_write_timeout(std::chrono::duration<double>(config_.timeout_s));
            auto res = client.Post(parts_.prefix + path, headers, payload, "application/json");
            if (!res) {
                last_error = "connection failure (" + httplib::to_string(res.error()) + ")";
                continue;
            }
            if (res->status >= 500) {
                last_error = "HTTP " + std::to_string(res->status) + extract_error(res->body);
                continue;
            }
            if (res->status >= 400) {
                throw BackendError(parts_.root + path + ": HTTP " + std::to_string(res->status) +
                                   extract_error(res->body));
            }
            auto parsed = nlohmann::json::parse(res->body, nullptr, false);
            if (parsed.is_discarded()) {
                throw BackendError(parts_.root + path + ": response is not valid JSON");
            }
            return parsed;
        }
        throw BackendError(parts_.root + path + ": " + last_error);
    }

    static std::string extract_error(const std::string& body) {
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_object() && j.contains("error")) {
            const auto& e = j["error"];
            if (e.is_string()) return ": " + e.get<std::string>();
            if (e.is_object() && e.contains("message") && e["message"].is_string()) {
                return ": " + e["message"].get<std::string>();
            }
        }
        return "";
    }

    UrlParts parts_;
    BackendConfig config_;
};

// Native scoring protocol: POST /v1/score {"prompt","continuation"} ->
// {"tokens":[...], "logprobs":[...]}.
class HttpScoreBackend : public Backend, private HttpClientBase {
public:
    explicit HttpScoreBackend(const BackendConfig& config) : HttpClientBase(config) {
        if (config.base_url.empty()) throw ConfigError("http backend requires base_url");
    }

    TokenScores score(const ScoreRequest& request) const override {
        nlohmann::json body{{"prompt", request.prompt}, {"continuation", request.continuation}};
        auto response = post_json("/v1/score", body, {});

        if (!response.is_object() || !response.contains("tokens") || !response.contains("logprobs")) {
            throw BackendError(name() + ": response missing tokens/logprobs");
        }
        TokenScores out;
        for (const auto& t : response["tokens"]) {
            if (!t.is_string()) throw BackendError(name() + ": non-string token");
            out.tokens.push_back(t.get<std::string>());
        }
        for (const auto& lp : response["logprobs"]) {
            if (!lp.is_number()) throw BackendError(name() + ": non-numeric logprob");
            out.logprobs.push_back(sanitize_logprob(lp.get<double>(), "http backend"));
        }
        if (out.tokens.empty() || out.tokens.size() != out.logprobs.size()) {
            throw BackendError(name() + ": tokens/logprobs length mismatch");
        }
        std::string joined;
        for (const auto& t : out.tokens) joined += t;
        if (joined != request.continuation) {
            throw BackendError(name() + ": tokens do not reconstruct the continuation");
        }
        return out;
    }

    std::string name() const override { return "http:" + config_.base_url; }
};

// Adapter for OpenAI-legacy completions with echo=true, logprobs>=0,
// max_tokens=0. Locates the continuation's token range by character
// offsets; a boundary that falls mid-token gets one newline-separator
// retry before reporting an alignment error.
class OpenAiBackend : public Backend, private HttpClientBase {
public:
    explicit OpenAiBackend(const BackendConfig& config) : HttpClientBase(config) {
        if (config.base_url.empty()) throw ConfigError("openai backend requires base_url");
        if (config.model.empty()) throw ConfigError("openai backend requires a model name");
    }

    TokenScores score(const ScoreRequest& request) const override {
        if (auto scores = try_score(request.prompt, request.continuation)) return *scores;
        auto retried = try_score(request.prompt + "\n", request.continuation);
        if (!retried) {
            throw AlignmentError(name() +
                                 ": prompt/continuation boundary is not a token boundary, "
                                 "even with a newline separator");
        }
        return *retried;
    }

    std::string name() const override { return "openai:" + config_.model; }

private:
    std::optional<TokenScores> try_score(const std::string& prompt,
                                         const std::string& continuation) const {
        nlohmann::json body{
            {"model", config_.model}, {"prompt", prompt + continuation},
            {"max_tokens", 0},        {"echo", true},
            {"logprobs", 0},          {"temperature", 0},
        };
        httplib::Headers headers;
        if (const char* token = std::getenv(kAuthTokenEnv); token && *token) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
        auto response = post_json("/v1/completions", body, headers);

        if (!response.is_object() || !response.contains("choices") ||
            !response["choices"].is_array() || response["choices"].empty()) {
            throw BackendError(name() + ": response has no choices");
        }
        const auto& lp = response["choices"][0]["logprobs"];
        if (!lp.is_object()) {
            throw BackendError(name() + ": backend did not return logprobs; "
                               "echo+logprobs support is required");
        }
        const auto& tokens = lp["tokens"];
        const auto& token_logprobs = lp["token_logprobs"];
        const auto& offsets = lp["text_offset"];
        if (!tokens.is_array() || !token_logprobs.is_array() || !offsets.is_array() ||
            tokens.size() != token_logprobs.size() || tokens.size() != offsets.size()) {
            throw BackendError(name() + ": malformed logprobs block");
        }

        std::size_t boundary = prompt.size();
        std::size_t first = tokens.size();
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            std::size_t off = offsets[i].get<std::size_t>();
            if (off == boundary) { first = i; break; }
            if (off > boundary) return std::nullopt; // boundary inside token i-1
        }
        if (first == tokens.size()) return std::nullopt;

        TokenScores out;
        std::string joined;
        for (std::size_t i = first; i < tokens.size(); ++i) {
            if (token_logprobs[i].is_null()) {
                throw BackendError(name() + ": null logprob inside the continuation range");
            }
            out.tokens.push_back(tokens[i].get<std::string>());
            out.logprobs.push_back(sanitize_logprob(token_logprobs[i].get<double>(), "openai backend"));
            joined += out.tokens.back();
        }
        if (out.tokens.empty() || joined != continuation) return std::nullopt;
        return out;
    }
};

} // namespace

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
    if (config.kind == "mock") return std::make_shared<MockBackend>(config.mock);
    if (config.kind == "http") return std::make_shared<HttpScoreBackend>(config);
    if (config.kind == "openai") return std::make_shared<OpenAiBackend>(config);
    throw ConfigError("unknown backend kind: " + config.kind);
}

LmGateway::LmGateway(std::shared_ptr<Backend> backend, int max_in_flight)
    : backend_(std::move(backend)), max_in_flight_(max_in_flight) {
    if (!backend_) throw ConfigError("gateway requires a backend");
    if (max_in_flight_ < 1) throw ConfigError("max_in_flight must be positive");
}

TokenScores LmGateway::score(const ScoreRequest& request) const {
    if (request.continuation.empty()) {
        throw Error("score: continuation must be non-empty");
    }
    TokenScores scores = backend_->score(request);
    if (scores.tokens.empty() || scores.tokens.size() != scores.logprobs.size()) {
        throw BackendError(backend_->name() + ": invalid token scores shape");
    }
    return scores;
}

std::vector<ScoreOutcome> LmGateway::score_batch(std::span<const ScoreRequest> requests) const {
    std::vector<ScoreOutcome> outcomes(requests.size());
    if (requests.empty()) return outcomes;

    std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(max_in_flight_),
                                                requests.size());
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= requests.size()) break;
            try {
                outcomes[i].scores = score(requests[i]);
            } catch (const std::exception& e) {
                outcomes[i].error = e.what();
            }
        }
    };

    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    return outcomes;
}

} // namespace ibrag
