#pragma once

#include <string>
#include <string_view>

#include "affect/hash.hpp"

namespace affect {

// The packaged scoring rubric, version 1. The scoring grid (0..5 in 0.5
// steps, 2.5 neutral, 0 most positive) and the strict JSON output contract
// that parse_trial enforces are both defined here; change either only by
// shipping a new version.
inline constexpr std::string_view kRubricVersion = "1";

inline constexpr std::string_view kRubricText =
    R"(Please act as a professional psychologist.

You will perform qualitative-to-quantitative sentiment evaluation for each dialogue line I provide.

Core objective:
Convert dialogue into numerical sentiment scores while capturing subtle emotional nuances and contextual continuity between utterances. Do not classify in isolation; model the evolving emotional trajectory between teacher and student.

Scoring rules:
- No explanations.
- Use a fixed 0.5 interval scale from 0 (most positive) to 5 (most negative).
- Neutral or factual tone corresponds to 2.5.
- Positive tone: decrease score from 2.5 toward 0 in 0.5 steps.
- Negative tone: increase score from 2.5 toward 5 in 0.5 steps.

Context and continuity:
- Always judge each sentence in relation to the preceding dialogue.
- Maintain smooth emotional evolution, but allow abrupt score changes when strong emotion or conflict clearly occurs.
- If the tone continues similarly, adjust the score slightly in the same direction.

Interaction guidance:
- Student confusion or frustration, or unresolved teacher frustration: move toward 5.
- Teacher empathy or successful re-engagement: move toward 0.
- Emotional recovery: reduce negativity only when the dialogue explicitly indicates resolution.

Escalation and emotional cues:
- Conflict, rejection, or blame: increase by up to +1.0.
- Frustration, boredom, or disengagement: increase by +0.5 to +1.0.
- Empathy, encouragement, or curiosity: decrease by -0.5 to -1.0.

Output format (strict):
- You MUST output a single valid JSON array.
- The array contains one JSON object per dialogue line, in chronological order.
- Do NOT add any extra text before or after the JSON.

Each JSON object must contain the following fields:
- "index": integer, 0-based index of the utterance.
- "speaker": either "teacher" or "student".
- "score": numeric sentiment score in [0, 5], using only 0.5 increments.
- "text": the full original sentence.

The following is the conversation to analyze:
)";

inline std::uint64_t rubric_hash(std::string_view text = kRubricText) { return fnv1a64(text); }

}  // namespace affect
