#ifndef FRICTION_FEEDBACK_HPP
#define FRICTION_FEEDBACK_HPP

#include <optional>
#include <string>
#include <vector>

#include "friction/rng.hpp"
#include "friction/types.hpp"

namespace friction {

/// Binary correctness feedback, constant across problems.
extern const char kF1Feedback[];

/// The fixed instruction appended to every reflective-feedback prompt.
extern const char kFeedbackInstruction[];

struct FeedbackRequest {
    const Problem& problem;
    const std::vector<IterationRecord>& trajectory_prefix;  // last record incorrect
    FeedbackMechanism mechanism = FeedbackMechanism::F1;
    const ModelHandle* generator = nullptr;  // F2: the solver itself; F3: the strong model
};

/// F1: the constant string, no model call.
std::string feedback_f1(const FeedbackRequest& req);

/// F2/F3: one generator call over (question, attempt/feedback history, gold
/// answer, solution steps when present, instruction), masked before return.
/// Feedback that masks down to nothing falls back to the F1 text.
std::string feedback_f2_f3(const FeedbackRequest& req, Rng& rng);

std::vector<ChatMessage> build_feedback_prompt(const Problem& p,
                                               const std::vector<IterationRecord>& prefix);

/// Replaces every standalone occurrence of a gold-answer alias with
/// "[masked]". Decorated multiple-choice variants ("(A)", "\boxed{A}",
/// "**A**") are masked whole; numeric tasks mask by value ("042" masks when
/// y = "42"), including boxed numbers; decimal multiplication additionally
/// masks the template's partial products. Pure, total, idempotent.
std::string mask_feedback(const std::string& text, const Problem& p);

/// Runtime leak check: the first standalone occurrence of any alias of the
/// gold answer, or nullopt when the text is clean. Every emitted feedback
/// must scan clean.
std::optional<std::string> find_leak(const std::string& text, const Problem& p);

/// Masks, then asserts the leak check. Applied to every feedback the engine
/// emits, including F1. Throws FeedbackLeak when a leak survives masking.
std::string mask_and_check(const std::string& text, const Problem& p);

}  // namespace friction

#endif
