#include "kgcodec/llm_client.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "httplib.h"
#include "json.hpp"

namespace kgcodec {

std::vector<std::string> default_stop_sequences(bool with_rationale) {
    std::vector<std::string> stops{"\"\"\"", "\nclass"};
    if (!with_rationale) stops.push_back("#");
    return stops;
}

void GenerationParams::validate() const {
    if (!(temperature >= 0.0) || temperature > 2.0)
        throw ValidationError("temperature must be in [0, 2]");
    if (max_tokens == 0) throw ValidationError("max_tokens must be positive");
    for (const auto& s : stop)
        if (s.empty()) throw ValidationError("stop sequences must be non-empty");
}

namespace {

std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex16(std::uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

std::string canonical_params(const GenerationParams& p) {
    char temp[32];
    std::snprintf(temp, sizeof(temp), "%.6f", p.temperature);
    std::string out = "temperature=";
    out += temp;
    out += ";max_tokens=" + std::to_string(p.max_tokens);
    out += ";stop=";
    for (std::size_t i = 0; i < p.stop.size(); ++i) {
        if (i) out += '\x1e';
        out += p.stop[i];
    }
    out += ";seed=";
    out += p.seed ? std::to_string(*p.seed) : "none";
    return out;
}

CompletionResponse error_response(std::string message) {
    CompletionResponse r;
    r.finish_reason = "error";
    r.error = std::move(message);
    return r;
}

nlohmann::json params_to_json(const GenerationParams& p) {
    nlohmann::json j{{"temperature", p.temperature},
                     {"max_tokens", p.max_tokens},
                     {"stop", p.stop}};
    if (p.seed)
        j["seed"] = *p.seed;
    else
        j["seed"] = nullptr;
    return j;
}

class HttpBackend final : public Backend {
public:
    explicit HttpBackend(BackendConfig config) : config_(std::move(config)) {
        if (config_.base_url.empty())
            throw ValidationError("http backend requires base_url");
        if (config_.model.empty())
            throw ValidationError("http backend requires a model name");
        split_url();
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
        if (origin_.rfind("https://", 0) == 0)
            throw ValidationError("this build lacks TLS support; use an http base_url");
#endif
    }

    CompletionResponse complete(const CompletionRequest& request) override {
        request.params.validate();
        nlohmann::json body{{"model", config_.model},
                            {"prompt", request.prompt},
                            {"temperature", request.params.temperature},
                            {"max_tokens", request.params.max_tokens},
                            {"stop", request.params.stop}};
        if (request.params.seed) body["seed"] = *request.params.seed;
        const std::string payload = body.dump();

        std::string last_error = "no attempts made";
        for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
            if (attempt > 0) backoff_sleep(attempt - 1);

            httplib::Client client(origin_);
            client.set_connection_timeout(std::chrono::milliseconds(config_.timeout_ms));
            client.set_read_timeout(std::chrono::milliseconds(config_.timeout_ms));
            httplib::Headers headers;
            if (const char* key = std::getenv(config_.api_key_env.c_str());
                key && *key)
                headers.emplace("Authorization", std::string("Bearer ") + key);

            auto res = client.Post(path_prefix_ + "/completions", headers, payload,
                                   "application/json");
            if (!res) {
                last_error = "transport error: " + httplib::to_string(res.error());
                continue;
            }
            if (res->status == 200) {
                auto parsed = parse_success(res->body);
                if (parsed.ok()) return parsed;
                return parsed;  // malformed 200 payload: not retryable
            }
            if (retryable_status(res->status)) {
                last_error = "server returned status " + std::to_string(res->status);
                continue;
            }
            return error_response("server returned status " + std::to_string(res->status));
        }
        return error_response(last_error + " after " +
                              std::to_string(config_.max_retries + 1) + " attempts");
    }

    std::string describe() const override {
        return "http " + config_.base_url + " model=" + config_.model;
    }

private:
    static bool retryable_status(int status) {
        return status == 429 || status == 500 || status == 502 || status == 503 ||
               status == 504;
    }

    void split_url() {
        std::string url = config_.base_url;
        while (!url.empty() && url.back() == '/') url.pop_back();
        const std::size_t scheme = url.find("://");
        if (scheme == std::string::npos)
            throw ValidationError("base_url must start with http:// or https://");
        const std::size_t slash = url.find('/', scheme + 3);
        if (slash == std::string::npos) {
            origin_ = url;
            path_prefix_.clear();
        } else {
            origin_ = url.substr(0, slash);
            path_prefix_ = url.substr(slash);
        }
    }

    CompletionResponse parse_success(const std::string& body) {
        nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() ||
            j["choices"].empty())
            return error_response("malformed completion payload");
        const auto& choice = j["choices"][0];
        if (!choice.contains("text") || !choice["text"].is_string())
            return error_response("completion payload has no text");
        CompletionResponse r;
        r.text = choice["text"].get<std::string>();
        r.finish_reason = choice.value("finish_reason", "stop");
        if (r.finish_reason.empty()) r.finish_reason = "stop";
        return r;
    }

    void backoff_sleep(std::size_t attempt) {
        const std::uint64_t ceiling =
            static_cast<std::uint64_t>(config_.backoff_base_ms) << std::min<std::size_t>(attempt, 16);
        std::uniform_int_distribution<std::uint64_t> jitter(0, ceiling);
        std::uint64_t ms;
        {
            std::lock_guard<std::mutex> lock(rng_mutex_);
            ms = jitter(rng_);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }

    BackendConfig config_;
    std::string origin_;
    std::string path_prefix_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_{std::random_device{}()};
};

class FixtureBackend final : public Backend {
public:
    explicit FixtureBackend(BackendConfig config) : config_(std::move(config)) {
        std::ifstream in(config_.fixture_path, std::ios::binary);
        if (!in) throw IoError("cannot open fixture file: " + config_.fixture_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("fixture file is not valid JSON: " +
                                  std::string(e.what()));
        }
        if (!j.is_object())
            throw ValidationError("fixture file must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (!value.is_string())
                throw ValidationError("fixture entry '" + key + "' is not a string");
            fixtures_[key] = value.get<std::string>();
        }
    }

    CompletionResponse complete(const CompletionRequest& request) override {
        request.params.validate();
        const std::string* text = nullptr;
        if (!request.tag.empty()) text = lookup(request.tag);
        if (!text) text = lookup(stable_prompt_hash(request.prompt));
        if (!text) text = lookup("__default__");
        if (!text)
            return error_response("no fixture for tag '" + request.tag + "' or hash " +
                                  stable_prompt_hash(request.prompt));
        CompletionResponse r;
        r.text = *text;
        r.finish_reason = "stop";
        return r;
    }

    std::string describe() const override { return "fixture " + config_.fixture_path; }

private:
    const std::string* lookup(const std::string& key) const {
        auto it = fixtures_.find(key);
        return it != fixtures_.end() ? &it->second : nullptr;
    }

    BackendConfig config_;
    std::unordered_map<std::string, std::string> fixtures_;
};

class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(BackendConfig config) : config_(std::move(config)) {
        if (config_.cache_path.empty())
            throw ValidationError("replay backend requires cache_path");
        load_cache();

        BackendConfig inner = config_;
        if (!config_.fixture_path.empty()) {
            inner.kind = BackendKind::Fixture;
            inner_ = make_backend(inner);
        } else if (!config_.base_url.empty() && !config_.model.empty()) {
            inner.kind = BackendKind::Http;
            inner_ = make_backend(inner);
        }
    }

    CompletionResponse complete(const CompletionRequest& request) override {
        request.params.validate();
        const std::string key = stable_cache_key(request.prompt, request.params);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) {
                CompletionResponse r;
                r.text = it->second.text;
                r.finish_reason = it->second.finish_reason;
                return r;
            }
        }
        if (!inner_)
            return error_response("replay cache miss for key " + key +
                                  " and no backend to record from");
        CompletionResponse r = inner_->complete(request);
        if (!r.ok()) return r;  // errors are never cached

        nlohmann::json line{{"key", key},
                            {"params", params_to_json(request.params)},
                            {"text", r.text},
                            {"finish_reason", r.finish_reason}};
        std::lock_guard<std::mutex> lock(mutex_);
        cache_[key] = {r.text, r.finish_reason};
        std::ofstream out(config_.cache_path, std::ios::binary | std::ios::app);
        if (!out) throw IoError("cannot append to cache file: " + config_.cache_path);
        out << line.dump() << '\n';
        return r;
    }

    std::string describe() const override {
        return "replay " + config_.cache_path + (inner_ ? " recording" : " readonly");
    }

private:
    struct Entry {
        std::string text;
        std::string finish_reason;
    };

    void load_cache() {
        std::ifstream in(config_.cache_path, std::ios::binary);
        if (!in) return;  // a missing cache file simply starts empty
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("key") || !j.contains("text"))
                throw ValidationError("cache file " + config_.cache_path + " line " +
                                      std::to_string(lineno) + " is malformed");
            cache_[j["key"].get<std::string>()] = {
                j["text"].get<std::string>(), j.value("finish_reason", "stop")};
        }
    }

    BackendConfig config_;
    std::unique_ptr<Backend> inner_;
    std::mutex mutex_;
    std::unordered_map<std::string, Entry> cache_;
};

}  // namespace

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
    switch (config.kind) {
        case BackendKind::Http: return std::make_unique<HttpBackend>(config);
        case BackendKind::Fixture: return std::make_unique<FixtureBackend>(config);
        case BackendKind::Replay: return std::make_unique<ReplayBackend>(config);
    }
    throw ValidationError("unknown backend kind");
}

std::string stable_prompt_hash(std::string_view prompt) {
    return to_hex16(fnv1a64(prompt));
}

std::string stable_cache_key(std::string_view prompt, const GenerationParams& params) {
    std::string material(prompt);
    material += '\x1f';
    material += canonical_params(params);
    return to_hex16(fnv1a64(material));
}

std::vector<CompletionResponse> complete_batch(
    const std::vector<CompletionRequest>& requests, Backend& backend,
    std::size_t max_concurrency) {
    std::vector<CompletionResponse> responses(requests.size());
    if (requests.empty()) return responses;

    const std::size_t workers =
        std::max<std::size_t>(1, std::min(max_concurrency, requests.size()));
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= requests.size()) return;
            try {
                responses[i] = backend.complete(requests[i]);
            } catch (const std::exception& e) {
                responses[i] = error_response(e.what());
            }
        }
    };

    if (workers == 1) {
        work();
        return responses;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
    return responses;
}

}  // namespace kgcodec
