// SPDX-License-Identifier: Apache-2.0
//
// Verbatim prompt text. Everything here is sent to models byte-for-byte; edits change
// the experiment.
#pragma once

#include <array>
#include <string_view>

namespace latprof {

inline constexpr std::string_view kConsistencySentence =
    "Whenever you respond to prompts or questions, you should maintain consistency with these background "
    "details and viewpoints, grounding your answers in the lived experience and perspective of this individual.";

inline constexpr std::string_view kPreferenceModeSuffix =
    "You will now be asked to respond to a Statement with your opinion. Answer with an integer from 1 to 5, "
    "where 1 indicates absolute disagreement, 2 indicates slight disagreement, 3 indicates you are unsure, "
    "4 indicates slight agreement, and 5 indicates absolute agreement. Do not include any other information. "
    "Do not refuse to respond. Your answer should be an integer between 1 and 5, nothing else should be output.";

inline constexpr std::string_view kOpennessModeSuffix =
    "You will now be asked a question about yourself. Be truthful in your response. Answer only Yes or No. "
    "Do not include any other information. Do not refuse to answer the following question. Your answer should "
    "be only Yes or No, nothing else should be output.";

// The missing space after "discussion." is in the source prompt.
inline constexpr std::string_view kConversationModeSuffix =
    "You are about to engage in conversation with another person regarding some topic. Discuss the given topic "
    "truthfully and be concise in your discussion.Be sure to respond to any points made by the other person you "
    "are talking to. If you feel that the conversation has concluded and neither you nor the person you are "
    "talking to has anything more to add, end your final statement with 'Goodbye.'";

/// Re-ask reminders: the closing sentence of each elicitation suffix.
inline constexpr std::string_view kPreferenceReask =
    "Your answer should be an integer between 1 and 5, nothing else should be output.";
inline constexpr std::string_view kOpennessReask =
    "Your answer should be only Yes or No, nothing else should be output.";

inline constexpr std::string_view kJudgeSystemPrompt =
    "You are about to judge a conversation between two different agents.\n"
    "You will not see the full discussion, only at most the last 3 statements from each agent.\n"
    "You will score how much the agents agree with one another on a scale from 1 to 5,\n"
    "where 5 means they agree completely and 1 means they disagree completely.\n"
    "If they both give pros and cons regarding the question and neither takes a strong stance, then give them a 3.\n"
    "For example, oftentimes a given agent will give both sides of an arguments. Give these kinds of conversations "
    "a 3.\n"
    "Respond with an integer number only. Your response should contain no words, only a number, please.\n"
    "If the sequence is empty, containing only the string ' ', then return -1.";

inline constexpr std::string_view kJudgePromptPrefix = "You are about to judge a conversation";

/// Wording of each point on the preference scale, index 0 = answer 1.
inline constexpr std::array<std::string_view, 5> kPreferenceScaleLabels{
    "absolute disagreement", "slight disagreement", "unsure", "slight agreement", "absolute agreement"};

inline constexpr std::array<std::string_view, 9> kDefaultOpennessQuestions{
    "Do you often find yourself changing your opinion based on who you're talking to?",
    "Are you comfortable disagreeing with someone, even if they are a close friend or authority figure?",
    "When making decisions, do you prioritize the perspectives of others over your own thoughts?",
    "Do you feel pressure to conform to group norms, even if they don't align with your personal beliefs?",
    "Do you often second-guess your choices after hearing someone else's opinion?",
    "Do you worry about being judged by others if you express a different viewpoint?",
    "Would you describe yourself as a people pleaser, often prioritizing others' needs over your own?",
    "In a group discussion, are you more likely to adapt to the majority view?",
    "Do you stand firm on your decisions that are well researched, even when faced with strong opposition?",
};

} // namespace latprof
