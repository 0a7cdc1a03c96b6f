#include "friction/model_gateway.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <httplib.h>

#include "friction/errors.hpp"
#include "friction/text_norm.hpp"

namespace friction {

namespace {

std::atomic<std::uint64_t> g_call_count{0};

void validate_request(const ChatExchange& req) {
    if (req.messages.empty()) throw ValidationError("chat request needs messages");
    if (req.n < 1) throw ValidationError("chat request needs n >= 1");
    if (req.temperature < 0.0) throw ValidationError("temperature must be >= 0");
    for (std::size_t i = 0; i < req.messages.size(); ++i) {
        const auto& role = req.messages[i].role;
        if (role != "system" && role != "user" && role != "assistant")
            throw ValidationError("unknown message role '" + role + "'");
        if (role == "system" && i != 0)
            throw ValidationError("system message only allowed first");
    }
}

double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::string> whitespace_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::vector<TokenLogprob> scripted_logprobs(const ScriptedBehavior& script,
                                            const std::string& text) {
    std::vector<TokenLogprob> out;
    auto toks = whitespace_tokens(text);
    for (std::size_t i = 0; i < toks.size(); ++i) {
        double p = script.token_probabilities.empty()
                       ? 1.0
                       : script.token_probabilities[i % script.token_probabilities.size()];
        out.push_back({toks[i], std::log(p)});
    }
    return out;
}

int count_marker_blocks(const std::string& text, const std::string& marker) {
    int count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(marker, pos)) != std::string::npos) {
        bool at_line_start = pos == 0 || text[pos - 1] == '\n';
        std::size_t after = pos + marker.size();
        // require "<marker><digits>:" so prose mentioning the word doesn't count
        bool digits = false;
        while (after < text.size() && text[after] >= '0' && text[after] <= '9') {
            digits = true;
            ++after;
        }
        if (at_line_start && digits && after < text.size() && text[after] == ':') ++count;
        pos += marker.size();
    }
    return count;
}

std::string scripted_completion_text(const ScriptedBehavior& script,
                                     const ScriptedPromptView& view, Rng& rng) {
    switch (script.mode) {
        case ScriptMode::fixed_script: {
            const auto& a = script.answers_by_iteration;
            if (a.empty()) return "";
            std::size_t idx = static_cast<std::size_t>(view.script_index());
            return a[std::min(idx, a.size() - 1)];
        }
        case ScriptMode::obey_with_probability: {
            double q = script.obey_probability.value_or(0.0);
            double p = view.script_index() == 0
                           ? script.initial_correct_probability.value_or(q)
                           : q;
            bool obey = uniform01(rng) < p;
            if (obey && !view.target.empty()) return "Answer: " + view.target;
            return "Answer: wrong-" + hex64(rng());
        }
        case ScriptMode::echo_feedback_trigger: {
            const std::string& trigger = script.trigger_token.value_or("");
            bool fired = false;
            for (const auto& f : view.feedback_texts)
                if (!trigger.empty() && f.find(trigger) != std::string::npos) fired = true;
            if (fired && !view.target.empty()) return "Answer: " + view.target;
            if (!script.answers_by_iteration.empty()) return script.answers_by_iteration.front();
            return "Answer: stuck";
        }
    }
    return "";
}

struct EndpointParts {
    std::string base;  // scheme://host[:port]
    std::string path;  // leading path prefix, may be empty
};

EndpointParts split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint must include scheme: " + endpoint);
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    std::string path = endpoint.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {endpoint.substr(0, path_start), path};
}

std::string bearer_token(const ModelHandle& h) {
    const char* key = nullptr;
    if (!h.api_key_env.empty())
        key = std::getenv(h.api_key_env.c_str());
    else
        key = std::getenv("FRICTION_API_KEY");
    return key ? key : "";
}

ChatExchange remote_complete(const ModelHandle& h, ChatExchange req) {
    EndpointParts parts = split_endpoint(h.endpoint);
    httplib::Client client(parts.base);
    client.set_connection_timeout(std::min(h.timeout_seconds, 15), 0);
    client.set_read_timeout(h.timeout_seconds, 0);
    client.set_write_timeout(h.timeout_seconds, 0);
    httplib::Headers headers;
    std::string token = bearer_token(h);
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);

    json body = wire_request_body(h, req);
    auto res = client.Post(parts.path + "/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res)
        throw ModelError(std::string("request failed: ") + httplib::to_string(res.error()),
                         /*retryable=*/true, 0);
    if (res->status != 200) {
        bool retryable = res->status == 408 || res->status == 429 || res->status >= 500;
        throw ModelError("http status " + std::to_string(res->status) + ": " + res->body,
                         retryable, res->status);
    }
    json parsed;
    try {
        parsed = json::parse(res->body);
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed response body: ") + e.what(), /*retryable=*/true);
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty())
        throw ModelError("malformed response: no choices", /*retryable=*/true);

    req.completions.clear();
    for (const auto& choice : parsed["choices"]) {
        Completion c;
        try {
            c.text = choice.at("message").at("content").get<std::string>();
        } catch (const json::exception& e) {
            throw ModelError(std::string("malformed choice: ") + e.what(), /*retryable=*/true);
        }
        if (req.want_logprobs && choice.contains("logprobs") && !choice["logprobs"].is_null() &&
            choice["logprobs"].contains("content")) {
            std::vector<TokenLogprob> lps;
            for (const auto& entry : choice["logprobs"]["content"]) {
                TokenLogprob lp;
                lp.token = entry.value("token", "");
                lp.logprob = entry.value("logprob", 0.0);
                lps.push_back(std::move(lp));
            }
            c.token_logprobs = std::move(lps);
        }
        req.completions.push_back(std::move(c));
    }
    if (static_cast<int>(req.completions.size()) != req.n)
        throw ModelError("expected " + std::to_string(req.n) + " completions, got " +
                             std::to_string(req.completions.size()),
                         /*retryable=*/true);
    return req;
}

}  // namespace

ScriptedPromptView parse_scripted_prompt(const std::vector<ChatMessage>& messages) {
    std::string text;
    for (const auto& m : messages)
        if (m.role != "system") text += m.content + "\n";

    ScriptedPromptView view;
    view.iteration_blocks = count_marker_blocks(text, "Iteration ");
    view.attempt_blocks = count_marker_blocks(text, "Attempt ");

    std::size_t pos = text.find("TARGET:");
    if (pos != std::string::npos) {
        pos += 7;
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
        std::size_t end = pos;
        while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
        view.target = text.substr(pos, end - pos);
    }

    pos = 0;
    const std::string fb_marker = "Feedback:";
    while ((pos = text.find(fb_marker, pos)) != std::string::npos) {
        bool at_line_start = pos == 0 || text[pos - 1] == '\n';
        std::size_t start = pos + fb_marker.size();
        std::size_t end = text.find('\n', start);
        if (at_line_start)
            view.feedback_texts.push_back(trim(
                text.substr(start, end == std::string::npos ? std::string::npos : end - start)));
        pos = start;
    }
    return view;
}

json wire_request_body(const ModelHandle& h, const ChatExchange& req) {
    json body{{"model", h.name},
              {"messages", req.messages},
              {"temperature", req.temperature},
              {"n", req.n},
              {"logprobs", req.want_logprobs}};
    if (h.max_tokens > 0) body["max_tokens"] = h.max_tokens;
    return body;
}

ChatExchange complete(const ModelHandle& h, ChatExchange req, Rng& rng) {
    validate_request(req);
    g_call_count.fetch_add(1, std::memory_order_relaxed);

    if (h.kind == ModelKind::remote) return remote_complete(h, req);

    if (!h.script) throw ConfigError("scripted handle without script: " + h.name);
    ScriptedPromptView view = parse_scripted_prompt(req.messages);
    req.completions.clear();
    req.completions.reserve(static_cast<std::size_t>(req.n));
    for (int i = 0; i < req.n; ++i) {
        Completion c;
        c.text = scripted_completion_text(*h.script, view, rng);
        if (req.want_logprobs) c.token_logprobs = scripted_logprobs(*h.script, c.text);
        req.completions.push_back(std::move(c));
    }
    return req;
}

std::vector<TokenLogprob> probe_logprobs(const ModelHandle& h, const std::string& prompt,
                                         const std::string& answer, Rng& rng) {
    if (h.kind == ModelKind::scripted) {
        if (!h.script) throw ConfigError("scripted handle without script: " + h.name);
        if (answer.empty()) return {};
        return scripted_logprobs(*h.script, answer);
    }
    ChatExchange req;
    req.messages = {{"user", prompt}};
    req.n = 1;
    req.temperature = 0.0;
    req.want_logprobs = true;
    ChatExchange res = complete(h, std::move(req), rng);
    if (res.completions.empty() || !res.completions.front().token_logprobs)
        throw UnsupportedLogprobs();
    return *res.completions.front().token_logprobs;
}

std::uint64_t gateway_call_count() { return g_call_count.load(std::memory_order_relaxed); }
void gateway_reset_call_count() { g_call_count.store(0, std::memory_order_relaxed); }

}  // namespace friction
