#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kgcodec/core.hpp"

namespace kgcodec {

// Stop sequences for code-shaped completions. Rationale comments begin with
// '#', so that stop is only safe when no rationale is expected.
std::vector<std::string> default_stop_sequences(bool with_rationale);

struct GenerationParams {
    double temperature = 0.5;
    std::size_t max_tokens = 512;
    std::vector<std::string> stop = default_stop_sequences(false);
    std::optional<std::uint64_t> seed;

    void validate() const;  // throws ValidationError
};

struct CompletionRequest {
    std::string prompt;
    GenerationParams params;
    std::string tag;  // optional fixture lookup key
};

struct CompletionResponse {
    std::string text;
    std::string finish_reason;  // "stop", "length", or "error"
    std::string error;          // set when finish_reason == "error"

    bool ok() const { return finish_reason != "error"; }
};

enum class BackendKind { Http, Fixture, Replay };

struct BackendConfig {
    BackendKind kind = BackendKind::Fixture;
    // Http (and Replay record mode): OpenAI-style completions endpoint.
    std::string base_url;
    std::string model;
    // Name of the environment variable holding the API key. The key itself is
    // read lazily per request and never stored, logged, or serialized.
    std::string api_key_env = "KGCODEC_API_KEY";
    std::size_t max_retries = 3;
    std::size_t backoff_base_ms = 250;
    std::size_t timeout_ms = 60000;
    // Fixture: JSON object mapping tag or prompt hash (or "__default__") to
    // completion text.
    std::string fixture_path;
    // Replay: JSONL cache of completions keyed by stable_cache_key. Record
    // mode switches on when an inner backend (http or fixture) is configured.
    std::string cache_path;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string describe() const = 0;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& config);

// FNV-1a over the prompt bytes, as 16 lowercase hex digits.
std::string stable_prompt_hash(std::string_view prompt);

// Hash of the prompt plus canonicalized generation parameters; the replay
// cache is keyed by this.
std::string stable_cache_key(std::string_view prompt, const GenerationParams& params);

// Runs requests through the backend on up to max_concurrency threads.
// Responses line up with requests by index; a failure (exception or backend
// error) becomes an "error" response without disturbing the others.
std::vector<CompletionResponse> complete_batch(
    const std::vector<CompletionRequest>& requests, Backend& backend,
    std::size_t max_concurrency);

}  // namespace kgcodec
