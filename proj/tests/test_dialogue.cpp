// SPDX-License-Identifier: Apache-2.0
#include "latprof/dialogue.hpp"
#include "latprof/errors.hpp"
#include "latprof/scripted_backend.hpp"

#include <gtest/gtest.h>

#include <deque>
#include <set>

using namespace latprof;

namespace {

AgentSpec agent(std::string id, Region region) {
    return {std::move(id),
            {region, AgeGroup::Thirties, Gender::Woman, Urbanicity::Suburban, Education::College},
            BiasSpec::none(),
            "taxes"};
}

ProfiledAgent profiled(std::string id, int p, int o, BiasSpec bias = {}) {
    AgentSpec s = agent(std::move(id), Region::Eastern);
    s.bias = bias;
    return {s, LatentProfile(p, o)};
}

Gateway scripted_by_region(ConversationPolicy opener, ConversationPolicy responder, int k = 1) {
    ScriptedConfig cfg;
    cfg.defaults.conversation = opener;
    ScriptedPatch p;
    p.conversation = responder;
    p.goodbye_k = k;
    cfg.rules.push_back({"Southern United States", p});
    return Gateway(std::make_shared<ScriptedBackend>(cfg));
}

Transcript talk(Gateway& g, int max_turns = 5) {
    const auto grid = GridDefinition::defaults();
    ConversationOptions o;
    o.max_turns_per_agent = max_turns;
    return run_conversation(grid, agent("a", Region::Eastern), agent("b", Region::Southern), grid.topic("taxes"), g, o);
}

Transcript with_texts(std::vector<std::string> texts) {
    Transcript t;
    t.conversation_id = "a__b";
    t.pair = {"a", "b"};
    for (auto& s : texts) t.turns.push_back({static_cast<int>(t.turns.size()), t.turns.size() % 2 ? "b" : "a", s});
    return t;
}

class FixedJudge : public ChatBackend {
public:
    explicit FixedJudge(std::deque<std::string> replies) : replies_(std::move(replies)) {}
    std::string complete(const ChatRequest& r) override {
        requests.push_back(r);
        if (replies_.empty()) return "3";
        auto s = replies_.front();
        replies_.pop_front();
        return s;
    }
    std::string describe() const override { return "fixed"; }
    std::vector<ChatRequest> requests;

private:
    std::deque<std::string> replies_;
};

} // namespace

TEST(Conversation, OpenerQuestion) {
    EXPECT_EQ(opener_question(GridDefinition::defaults().topic("taxes")),
              "Do you think that taxes help to meet the needs of society?");
}

TEST(Conversation, EchoHitsTheTurnCap) {
    auto g = scripted_by_region(ConversationPolicy::Echo, ConversationPolicy::Echo);
    const auto t = talk(g);
    EXPECT_EQ(t.turns.size(), 10u);
    EXPECT_EQ(t.end_reason, EndReason::TurnCap);
    EXPECT_NO_THROW(check_transcript(t, 5));
    EXPECT_EQ(t.turns[0].text, "Do you think that taxes help to meet the needs of society?");
    for (std::size_t i = 0; i < t.turns.size(); ++i) EXPECT_EQ(t.turns[i].speaker, i % 2 ? "b" : "a");
}

TEST(Conversation, GoodbyeStopsImmediately) {
    auto g = scripted_by_region(ConversationPolicy::Echo, ConversationPolicy::GoodbyeAfterK, 1);
    const auto t = talk(g);
    // Responder speaks at turns 1 and 3; its second turn ends the conversation.
    ASSERT_EQ(t.turns.size(), 4u);
    EXPECT_EQ(t.end_reason, EndReason::Goodbye);
    EXPECT_TRUE(ends_with_goodbye(t.turns.back().text));
    EXPECT_EQ(t.turns.back().speaker, "b");
}

TEST(Conversation, GoodbyeDetection) {
    EXPECT_TRUE(ends_with_goodbye("Nice talking. Goodbye.  \n"));
    EXPECT_FALSE(ends_with_goodbye("Goodbye. Actually, one more thing"));
    EXPECT_FALSE(ends_with_goodbye("goodbye."));
}

TEST(Conversation, TwoEmptyRepliesEndIt) {
    auto backend = std::make_shared<FixedJudge>(std::deque<std::string>{"first", "", ""});
    Gateway g(backend);
    const auto t = talk(g);
    EXPECT_EQ(t.end_reason, EndReason::DoubleEmpty);
    EXPECT_EQ(t.turns.size(), 4u);
}

TEST(Conversation, BackendFailureLeavesPartialTranscript) {
    class Failing : public ChatBackend {
    public:
        std::string complete(const ChatRequest& r) override {
            if (r.messages.size() >= 3) throw TransportError("down", 1);
            return "reply";
        }
        std::string describe() const override { return "failing"; }
    };
    Gateway g(std::make_shared<Failing>(), {1});
    const auto t = talk(g);
    EXPECT_TRUE(t.partial());
    EXPECT_EQ(t.end_reason, EndReason::Failure);
    EXPECT_EQ(t.turns.size(), 3u);

    auto judge = Gateway(std::make_shared<FixedJudge>(std::deque<std::string>{}));
    const auto judged = judge_transcript(t, judge, {});
    EXPECT_FALSE(judged.judged);
}

TEST(Conversation, RolesFollowTheSpeaker) {
    auto backend = std::make_shared<FixedJudge>(std::deque<std::string>{"r1", "r2", "r3"});
    Gateway g(backend);
    talk(g, 2);
    ASSERT_EQ(backend->requests.size(), 3u);
    const auto& third = backend->requests[2];  // responder's second turn
    ASSERT_EQ(third.messages.size(), 3u);
    EXPECT_EQ(third.messages[0].role, Role::User);
    EXPECT_EQ(third.messages[1].role, Role::Assistant);
    EXPECT_EQ(third.messages[2].role, Role::User);
}

TEST(Conversation, RefusesSelfConversation) {
    auto g = scripted_by_region(ConversationPolicy::Echo, ConversationPolicy::Echo);
    const auto grid = GridDefinition::defaults();
    EXPECT_THROW(run_conversation(grid, agent("a", Region::Eastern), agent("a", Region::Eastern),
                                  grid.topic("taxes"), g, {}),
                 Error);
}

TEST(JudgeWindow, Arithmetic) {
    const auto t = with_texts({"t0", "t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9"});
    const auto w9 = build_judge_window(t, 9);
    ASSERT_EQ(w9.statements.size(), 6u);
    EXPECT_EQ(w9.statements.front().turn_index, 4);
    EXPECT_EQ(w9.statements.back().turn_index, 9);
    EXPECT_EQ(build_judge_window(t, 0).statements.size(), 1u);
    EXPECT_EQ(build_judge_window(t, 0).serialize(), "Agent 1: t0");
    EXPECT_EQ(build_judge_window(t, 1).serialize(), "Agent 1: t0\nAgent 2: t1");
    EXPECT_THROW(build_judge_window(t, 10), Error);
}

TEST(JudgeWindow, EmptyTextsSerializeToSingleSpace) {
    const auto t = with_texts({"", "", ""});
    const auto w = build_judge_window(t, 2);
    EXPECT_TRUE(w.blank());
    EXPECT_EQ(w.serialize(), " ");
}

TEST(Judge, EmptyWindowScoresMinusOneWithoutACall) {
    auto backend = std::make_shared<FixedJudge>(std::deque<std::string>{"5"});
    Gateway g(backend);
    EXPECT_EQ(judge_turn(build_judge_window(with_texts({""}), 0), g, {}), kNoScore);
    EXPECT_TRUE(backend->requests.empty());
}

TEST(Judge, ParsesAndReasksOnce) {
    auto backend = std::make_shared<FixedJudge>(std::deque<std::string>{"They mostly agree", "4"});
    Gateway g(backend);
    const auto w = build_judge_window(with_texts({"x", "y"}), 1);
    EXPECT_EQ(judge_turn(w, g, {}), 4);
    ASSERT_EQ(backend->requests.size(), 2u);
    EXPECT_EQ(backend->requests[0].system_prompt, kJudgeSystemPrompt);
    EXPECT_EQ(backend->requests[1].messages.back().content, "Respond with an integer number only.");

    auto hopeless = std::make_shared<FixedJudge>(std::deque<std::string>{"hmm", "no idea"});
    Gateway g2(hopeless);
    EXPECT_EQ(judge_turn(w, g2, {}), kNoScore);
    auto minus = std::make_shared<FixedJudge>(std::deque<std::string>{"-1"});
    Gateway g3(minus);
    EXPECT_EQ(judge_turn(w, g3, {}), kNoScore);
}

TEST(Judge, CalibrationExemplarsPrecedeTheWindow) {
    auto backend = std::make_shared<FixedJudge>(std::deque<std::string>{"2"});
    Gateway g(backend);
    JudgeOptions o;
    for (int s = 1; s <= 5; ++s) o.calibration.push_back({"Agent 1: ex" + std::to_string(s), s});
    EXPECT_EQ(judge_turn(build_judge_window(with_texts({"x"}), 0), g, o), 2);
    const auto& msgs = backend->requests[0].messages;
    ASSERT_EQ(msgs.size(), 11u);
    EXPECT_EQ(msgs[1].content, "1");
    EXPECT_EQ(msgs.back().content, "Agent 1: x");
}

TEST(Judge, ScriptedStanceMatch) {
    ScriptedBehavior b;
    b.judge = JudgePolicy::StanceMatch;
    Gateway g(std::make_shared<ScriptedBackend>(b));
    JudgeOptions o;
    o.system_prompt = std::string(kJudgeSystemPrompt);
    const auto both_sides = with_texts({"There are pros and cons.", "It depends on the case."});
    EXPECT_EQ(judge_turn(build_judge_window(both_sides, 1), g, o), 3);
    const auto same = with_texts({"My view on this is 2 out of 5.", "Honestly, I am at 2 out of 5 here."});
    EXPECT_EQ(judge_turn(build_judge_window(same, 1), g, o), 5);
}

TEST(Judge, TranscriptFinalScoreIsLastValid) {
    auto backend = std::make_shared<FixedJudge>(std::deque<std::string>{"3", "4", "4", "-1"});
    Gateway g(backend);
    const auto t = with_texts({"a", "b", "c", "d"});
    const auto j = judge_transcript(t, g, {"judge"});
    EXPECT_TRUE(j.judged);
    EXPECT_EQ(j.final_score, 4);
    EXPECT_EQ(j.metadata.judge_model, "judge");
    EXPECT_NO_THROW(check_transcript(j, 5));
}

TEST(Pairing, TwoDistinctTuples) {
    const std::vector<ProfiledAgent> agents{profiled("a", 1, 0), profiled("b", 5, 9)};
    const auto plan = plan_pairs(agents, 1, 7);
    EXPECT_EQ(plan.pair_count(), 1u);
    EXPECT_EQ(plan.skipped_cells.size(), 2u);

    const std::vector<ProfiledAgent> four{profiled("a1", 1, 0), profiled("a2", 1, 0), profiled("b1", 5, 9),
                                          profiled("b2", 5, 9)};
    const auto p4 = plan_pairs(four, 1, 7);
    EXPECT_EQ(p4.cells.size(), 3u);
    EXPECT_EQ(p4.pair_count(), 3u);
}

TEST(Pairing, CapsAtAvailablePairs) {
    std::vector<ProfiledAgent> agents;
    for (int i = 0; i < 4; ++i) agents.push_back(profiled("a" + std::to_string(i), 3, 3));
    const auto plan = plan_pairs(agents, 10, 1);
    const auto pairs = plan.flatten();
    ASSERT_EQ(pairs.size(), 6u);
    std::set<std::set<std::string>> distinct;
    for (const auto& p : pairs) {
        EXPECT_NE(p.opener, p.responder);
        distinct.insert({p.opener, p.responder});
    }
    // Exhaustive enumeration of unordered pairs over four agents.
    std::set<std::set<std::string>> all;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) all.insert({"a" + std::to_string(i), "a" + std::to_string(j)});
    EXPECT_EQ(distinct, all);
}

TEST(Pairing, DeterministicAndSeedSensitive) {
    std::vector<ProfiledAgent> agents;
    for (int i = 0; i < 40; ++i)
        agents.push_back(profiled("x" + std::to_string(i), 1 + i % 5, i % 3,
                                  i % 2 ? BiasSpec::none() : BiasSpec::implicit(Polarity::Against)));
    const auto a = plan_pairs(agents, 3, 11).flatten();
    const auto b = plan_pairs(agents, 3, 11).flatten();
    const auto c = plan_pairs(agents, 3, 12).flatten();
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (const auto& p : a) EXPECT_NE(p.opener, p.responder);
}

TEST(Pairing, CellMembersRealizeTheirTuples) {
    std::vector<ProfiledAgent> agents;
    for (int i = 0; i < 30; ++i) agents.push_back(profiled("y" + std::to_string(i), 1 + i % 3, i % 2));
    std::map<std::string, ProfileTuple> tuple_of;
    for (const auto& a : agents) tuple_of[a.spec.agent_id] = a.tuple();
    const auto plan = plan_pairs(agents, 2, 5);
    for (const auto& [key, pairs] : plan.cells) {
        EXPECT_LE(pairs.size(), 2u);
        for (const auto& p : pairs)
            EXPECT_EQ(canonical_pair_key(tuple_of[p.opener], tuple_of[p.responder]), key);
    }
}
