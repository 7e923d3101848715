// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "latprof/domain.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace latprof {

struct BleuConfig {
    int max_n = 4;
    /// Stand-in for a zero clipped-precision numerator.
    double epsilon = 1e-9;
};

/// Lowercase; whitespace separates tokens; every ASCII punctuation character is its own token.
std::vector<std::string> tokenize(std::string_view text);

/// Sentence BLEU with uniform weights over 1..max_n grams, clipped precisions, brevity penalty
/// against the closest reference length (shorter on ties). Orders longer than the candidate
/// are left out of the geometric mean. An empty candidate scores 0.
double bleu(const std::vector<std::string>& candidate, const std::vector<std::vector<std::string>>& references,
            const BleuConfig& config = {});

/// Mean over texts of BLEU against all other texts. Throws DegenerateInput for < 2 texts.
double self_bleu(const std::vector<std::string>& texts, const BleuConfig& config = {});

struct DiversityScore {
    AgentId agent_id;
    /// Absent when the agent has no conversation with >= 2 non-empty own statements.
    std::optional<double> score;
    std::size_t n_conversations = 0;
};

/// Average over the agent's conversations of Self-BLEU over its own non-empty statements.
DiversityScore agent_diversity(const AgentId& agent_id, const std::vector<Transcript>& transcripts,
                               const BleuConfig& config = {});

/// Scores for every agent appearing in the transcripts, ordered by agent id.
std::vector<DiversityScore> all_agent_diversity(const std::vector<Transcript>& transcripts,
                                                const BleuConfig& config = {}, int workers = 1);

inline constexpr double kDefaultDiversityThreshold = 0.1926;

struct DiversityFilter {
    std::vector<Transcript> kept;
    std::vector<Transcript> removed;
    /// Agents whose score is strictly above the threshold.
    std::vector<AgentId> removed_agents;
};

/// Drops every conversation involving an agent scoring strictly above the threshold.
DiversityFilter filter_by_diversity(const std::vector<Transcript>& transcripts,
                                    const std::vector<DiversityScore>& scores,
                                    double threshold = kDefaultDiversityThreshold);

/// Tab-separated (agent_id, score, n_conversations, kept).
std::string diversity_tsv(const std::vector<DiversityScore>& scores, double threshold);

enum class AnnotationDimension { Naturalness, Faithfulness };
std::string_view to_string(AnnotationDimension d);
AnnotationDimension parse_annotation_dimension(std::string_view s);

struct AnnotationRecord {
    std::string conversation_id;
    int turn_index = 0;
    AnnotationDimension dimension = AnnotationDimension::Naturalness;
    /// 1..3, absent for N/A.
    std::optional<int> rating;
    std::string explanation;

    bool operator==(const AnnotationRecord&) const = default;
};

/// JSONL; "rating" is 1..3, null or "N/A". A malformed line throws ParseError with its line number.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);
std::vector<AnnotationRecord> parse_annotations(std::string_view jsonl, std::string_view source = "annotations");

struct AnnotationSummary {
    AnnotationDimension dimension = AnnotationDimension::Naturalness;
    int turn_index = 0;
    std::size_t n = 0;
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
};

/// Per (dimension, turn) mean of rated records and a bootstrap 95% interval whose draw size
/// equals the number of ratings. Turns with only N/A records are omitted.
std::vector<AnnotationSummary> summarize_annotations(const std::vector<AnnotationRecord>& records,
                                                     std::uint64_t seed = 0);

/// Blank worksheet rows: one per (turn, dimension), rating null.
std::vector<AnnotationRecord> worksheet_rows(const Transcript& transcript);

} // namespace latprof
