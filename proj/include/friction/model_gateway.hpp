#ifndef FRICTION_MODEL_GATEWAY_HPP
#define FRICTION_MODEL_GATEWAY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "friction/rng.hpp"
#include "friction/types.hpp"

namespace friction {

/// Runs one chat completion against a remote endpoint or a scripted model.
/// `req.completions` is ignored on input and holds the n results on return.
/// Scripted completions are pure functions of (script, messages, rng
/// position); the rng is untouched for remote handles.
///
/// Throws ModelError (retryable for timeouts, 429/5xx and malformed
/// bodies). A backend that cannot return logprobs fills completions without
/// them instead of failing.
ChatExchange complete(const ModelHandle& h, ChatExchange req, Rng& rng);

/// Per-token log-probabilities of `answer` under the model, one entry per
/// answer token, end-of-sequence excluded. Remote backends return the
/// logprobs of a fresh greedy completion; scripted backends score the given
/// answer from the script's token probabilities.
std::vector<TokenLogprob> probe_logprobs(const ModelHandle& h, const std::string& prompt,
                                         const std::string& answer, Rng& rng);

/// Request body for the wire protocol: POST <endpoint>/chat/completions.
json wire_request_body(const ModelHandle& h, const ChatExchange& req);

/// Total model calls issued since process start (test introspection).
std::uint64_t gateway_call_count();
void gateway_reset_call_count();

/// How a scripted backend reads a prompt. Exposed for tests.
struct ScriptedPromptView {
    int iteration_blocks = 0;  // solver prompts label history "Iteration j:"
    int attempt_blocks = 0;    // feedback/annotator prompts label it "Attempt j:"
    std::string target;        // token after "TARGET:" in the question, if any
    std::vector<std::string> feedback_texts;

    // fixed_script lookup position: the iteration being produced
    int script_index() const {
        return attempt_blocks > 0 ? attempt_blocks - 1 : iteration_blocks;
    }
};
ScriptedPromptView parse_scripted_prompt(const std::vector<ChatMessage>& messages);

}  // namespace friction

#endif
