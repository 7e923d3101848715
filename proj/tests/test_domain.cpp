// SPDX-License-Identifier: Apache-2.0
#include "latprof/domain.hpp"
#include "latprof/errors.hpp"

#include <gtest/gtest.h>

using namespace latprof;

TEST(PreferenceGap, PublishedPairings) {
    EXPECT_EQ(preference_gap(1, 5), 4);
    EXPECT_EQ(preference_gap(3, 3), 0);
    EXPECT_EQ(preference_gap(2, 5), 3);
    EXPECT_EQ(preference_gap(LatentProfile(5, 0), LatentProfile(1, 9)), 4);
}

TEST(PreferenceGap, SymmetricAndBounded) {
    for (int a = 1; a <= 5; ++a)
        for (int b = 1; b <= 5; ++b) {
            EXPECT_EQ(preference_gap(a, b), preference_gap(b, a));
            EXPECT_GE(preference_gap(a, b), 0);
            EXPECT_LE(preference_gap(a, b), 4);
        }
}

TEST(LatentProfile, RejectsOutOfRange) {
    EXPECT_THROW(LatentProfile(0, 3), Error);
    EXPECT_THROW(LatentProfile(6, 3), Error);
    EXPECT_THROW(LatentProfile(3, -1), Error);
    EXPECT_THROW(LatentProfile(3, 10), Error);
    EXPECT_NO_THROW(LatentProfile(1, 0));
    EXPECT_NO_THROW(LatentProfile(5, 9));
}

TEST(PairKey, CanonicalIsSymmetric) {
    const ProfileTuple u{1, 4, BiasSpec::none()};
    const ProfileTuple v{5, 2, BiasSpec::implicit(Polarity::Against)};
    EXPECT_EQ(canonical_pair_key(u, v), canonical_pair_key(v, u));
    const PairKey self = canonical_pair_key(u, u);
    EXPECT_EQ(self.first, self.second);
    EXPECT_NE(canonical_pair_key(u, v), self);
    EXPECT_NE(canonical_pair_key(u, v), canonical_pair_key(v, v));
    EXPECT_LE(canonical_pair_key(v, u).first, canonical_pair_key(v, u).second);
}

TEST(BiasSpec, BothNumberingsAndPolarityInvariant) {
    const auto b = BiasSpec::implicit(Polarity::InFavor);
    EXPECT_EQ(b.main_text_number(), 2);
    EXPECT_EQ(b.appendix_number(), 1);
    EXPECT_EQ(b.dual_label(), "B=2 (appendix B=1) in_favor");
    EXPECT_EQ(BiasSpec::none().dual_label(), "B=1 (appendix B=0)");
    EXPECT_EQ(BiasSpec::explicit_stance(Polarity::Against).label(), "explicit/against");
    EXPECT_THROW(BiasSpec(BiasLevel::None, Polarity::InFavor), Error);
    EXPECT_THROW(BiasSpec(BiasLevel::Explicit, std::nullopt), Error);
}

TEST(Demographics, LabelsRoundTrip) {
    for (auto v : kAllRegions) EXPECT_EQ(parse_region(to_string(v)), v);
    for (auto v : kAllAgeGroups) EXPECT_EQ(parse_age_group(to_string(v)), v);
    for (auto v : kAllGenders) EXPECT_EQ(parse_gender(to_string(v)), v);
    for (auto v : kAllUrbanicities) EXPECT_EQ(parse_urbanicity(to_string(v)), v);
    for (auto v : kAllEducations) EXPECT_EQ(parse_education(to_string(v)), v);
    EXPECT_THROW(parse_region("Northern"), ConfigError);
    EXPECT_EQ(kAllRegions.size() * kAllAgeGroups.size() * kAllGenders.size() * kAllUrbanicities.size() *
                  kAllEducations.size(),
              960u);
}

TEST(Topic, ValidateAndQuestionClause) {
    Topic t{"taxes", "Taxes help to meet the needs of society.", 3, "taxes", ""};
    EXPECT_NO_THROW(t.validate());
    EXPECT_EQ(question_clause_of(t), "taxes help to meet the needs of society");
    t.contentiousness = 4;
    EXPECT_THROW(t.validate(), ConfigError);
    t.contentiousness = 1;
    t.statement.clear();
    EXPECT_THROW(t.validate(), ConfigError);
}

namespace {

std::vector<Turn> scored(std::initializer_list<int> scores) {
    std::vector<Turn> turns;
    for (int s : scores) turns.push_back({static_cast<int>(turns.size()), turns.size() % 2 ? "b" : "a", "x", s});
    return turns;
}

Transcript transcript_of(std::vector<Turn> turns) {
    Transcript t;
    t.conversation_id = "a__b";
    t.pair = {"a", "b"};
    t.turns = std::move(turns);
    t.final_score = final_agreement(t.turns);
    return t;
}

} // namespace

TEST(FinalAgreement, RetentionRule) {
    EXPECT_EQ(final_agreement(scored({3, 4, 4, -1})), 4);
    EXPECT_EQ(final_agreement(scored({-1, -1})), std::nullopt);
    EXPECT_EQ(final_agreement(scored({2})), 2);
    EXPECT_EQ(final_agreement(scored({})), std::nullopt);
    EXPECT_EQ(final_agreement(scored({5, -1, 1, -1, -1})), 1);
}

TEST(CheckTranscript, AcceptsWellFormed) {
    EXPECT_NO_THROW(check_transcript(transcript_of(scored({3, 4, -1, 5, 2, 2, 1, 1, 3, -1})), 5));
}

TEST(CheckTranscript, RejectsBrokenInvariants) {
    EXPECT_THROW(check_transcript(transcript_of(scored({3, 3, 3, 3, 3, 3, 3, 3, 3, 3, 3})), 5), Error);

    auto swapped = transcript_of(scored({3, 4}));
    swapped.turns[1].speaker = "a";
    EXPECT_THROW(check_transcript(swapped, 5), Error);

    auto bad_score = transcript_of(scored({3, 4}));
    bad_score.turns[1].judge_score = 6;
    EXPECT_THROW(check_transcript(bad_score, 5), Error);

    auto stale = transcript_of(scored({3, 4}));
    stale.final_score = 3;
    EXPECT_THROW(check_transcript(stale, 5), Error);
}

TEST(EndReason, LabelsRoundTrip) {
    for (auto r : {EndReason::Goodbye, EndReason::DoubleEmpty, EndReason::TurnCap, EndReason::Failure})
        EXPECT_EQ(parse_end_reason(to_string(r)), r);
}
