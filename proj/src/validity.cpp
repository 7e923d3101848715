// SPDX-License-Identifier: Apache-2.0
#include "latprof/validity.hpp"

#include "latprof/errors.hpp"
#include "latprof/gateway.hpp"
#include "latprof/io.hpp"
#include "latprof/parallel.hpp"
#include "latprof/rng.hpp"
#include "latprof/stats.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>

namespace latprof {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    const auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            flush();
        } else if (c < 0x80 && std::ispunct(c)) {
            flush();
            out.emplace_back(1, ch);
        } else {
            cur += static_cast<char>(std::tolower(c));
        }
    }
    flush();
    return out;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts ngrams(const std::vector<std::string>& tokens, int n) {
    NgramCounts counts;
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= tokens.size(); ++i)
        ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                          tokens.begin() + static_cast<std::ptrdiff_t>(i + un))];
    return counts;
}

} // namespace

double bleu(const std::vector<std::string>& candidate, const std::vector<std::vector<std::string>>& references,
            const BleuConfig& config) {
    if (config.max_n < 1) throw Error("BLEU max_n must be >= 1");
    if (candidate.empty() || references.empty()) return 0.0;
    const int orders = std::min<int>(config.max_n, static_cast<int>(candidate.size()));
    double log_sum = 0.0;
    for (int n = 1; n <= orders; ++n) {
        const NgramCounts cand = ngrams(candidate, n);
        NgramCounts max_ref;
        for (const auto& ref : references)
            for (const auto& [g, c] : ngrams(ref, n)) max_ref[g] = std::max(max_ref[g], c);
        int clipped = 0, total = 0;
        for (const auto& [g, c] : cand) {
            total += c;
            const auto it = max_ref.find(g);
            if (it != max_ref.end()) clipped += std::min(c, it->second);
        }
        const double p = clipped == 0 ? config.epsilon : static_cast<double>(clipped) / total;
        log_sum += std::log(p);
    }
    const auto c = static_cast<long>(candidate.size());
    long r = static_cast<long>(references.front().size());
    for (const auto& ref : references) {
        const long len = static_cast<long>(ref.size());
        if (std::abs(len - c) < std::abs(r - c) || (std::abs(len - c) == std::abs(r - c) && len < r)) r = len;
    }
    const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return bp * std::exp(log_sum / orders);
}

double self_bleu(const std::vector<std::string>& texts, const BleuConfig& config) {
    if (texts.size() < 2) throw DegenerateInput("self_bleu needs at least 2 texts");
    std::vector<std::vector<std::string>> tokens;
    tokens.reserve(texts.size());
    for (const auto& t : texts) tokens.push_back(tokenize(t));
    double sum = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::vector<std::vector<std::string>> refs;
        for (std::size_t j = 0; j < tokens.size(); ++j)
            if (j != i) refs.push_back(tokens[j]);
        sum += bleu(tokens[i], refs, config);
    }
    return sum / static_cast<double>(texts.size());
}

DiversityScore agent_diversity(const AgentId& agent_id, const std::vector<Transcript>& transcripts,
                               const BleuConfig& config) {
    DiversityScore out{agent_id, std::nullopt, 0};
    double sum = 0.0;
    for (const auto& t : transcripts) {
        if (t.opener() != agent_id && t.responder() != agent_id) continue;
        std::vector<std::string> own;
        for (const auto& turn : t.turns)
            if (turn.speaker == agent_id && !trim(turn.text).empty()) own.push_back(turn.text);
        if (own.size() < 2) continue;
        sum += self_bleu(own, config);
        ++out.n_conversations;
    }
    if (out.n_conversations > 0) out.score = sum / static_cast<double>(out.n_conversations);
    return out;
}

std::vector<DiversityScore> all_agent_diversity(const std::vector<Transcript>& transcripts, const BleuConfig& config,
                                                int workers) {
    std::set<AgentId> ids;
    for (const auto& t : transcripts) {
        ids.insert(t.opener());
        ids.insert(t.responder());
    }
    const std::vector<AgentId> ordered(ids.begin(), ids.end());
    std::vector<DiversityScore> out(ordered.size());
    parallel_for(ordered.size(), workers,
                 [&](std::size_t i) { out[i] = agent_diversity(ordered[i], transcripts, config); });
    return out;
}

DiversityFilter filter_by_diversity(const std::vector<Transcript>& transcripts,
                                    const std::vector<DiversityScore>& scores, double threshold) {
    DiversityFilter out;
    std::set<AgentId> flagged;
    for (const auto& s : scores)
        if (s.score && *s.score > threshold) {
            flagged.insert(s.agent_id);
            out.removed_agents.push_back(s.agent_id);
            spdlog::info("agent {} removed: Self-BLEU {:.4f} > {}", s.agent_id, *s.score, threshold);
        }
    for (const auto& t : transcripts) {
        if (flagged.count(t.opener()) || flagged.count(t.responder()))
            out.removed.push_back(t);
        else
            out.kept.push_back(t);
    }
    return out;
}

std::string diversity_tsv(const std::vector<DiversityScore>& scores, double threshold) {
    std::string out = "agent_id\tscore\tn_conversations\tkept\n";
    char buf[64];
    for (const auto& s : scores) {
        out += s.agent_id;
        out += '\t';
        if (s.score) {
            std::snprintf(buf, sizeof buf, "%.6f", *s.score);
            out += buf;
        } else {
            out += "NA";
        }
        out += '\t' + std::to_string(s.n_conversations) + '\t';
        out += (s.score && *s.score > threshold) ? "false" : "true";
        out += '\n';
    }
    return out;
}

std::string_view to_string(AnnotationDimension d) {
    return d == AnnotationDimension::Naturalness ? "naturalness" : "faithfulness";
}

AnnotationDimension parse_annotation_dimension(std::string_view s) {
    if (s == "naturalness") return AnnotationDimension::Naturalness;
    if (s == "faithfulness") return AnnotationDimension::Faithfulness;
    throw ParseError("unknown annotation dimension: " + std::string(s));
}

void to_json(nlohmann::json& j, const AnnotationRecord& r) {
    j = nlohmann::json{{"conversation_id", r.conversation_id},
                       {"turn_index", r.turn_index},
                       {"dimension", std::string(to_string(r.dimension))},
                       {"rating", r.rating ? nlohmann::json(*r.rating) : nlohmann::json(nullptr)},
                       {"explanation", r.explanation}};
}

void from_json(const nlohmann::json& j, AnnotationRecord& r) {
    r.conversation_id = j.at("conversation_id").get<std::string>();
    r.turn_index = j.at("turn_index").get<int>();
    if (r.turn_index < 0) throw ParseError("turn_index must be >= 0");
    r.dimension = parse_annotation_dimension(j.at("dimension").get<std::string>());
    const auto& rating = j.at("rating");
    if (rating.is_null() || (rating.is_string() && rating.get<std::string>() == "N/A")) {
        r.rating.reset();
    } else if (rating.is_number_integer()) {
        const int v = rating.get<int>();
        if (v < 1 || v > 3) throw ParseError("rating must be 1, 2, 3 or N/A");
        r.rating = v;
    } else {
        throw ParseError("rating must be 1, 2, 3 or N/A");
    }
    r.explanation = j.value("explanation", std::string());
}

std::vector<AnnotationRecord> parse_annotations(std::string_view jsonl, std::string_view source) {
    std::vector<AnnotationRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= jsonl.size()) {
        const std::size_t end = std::min(jsonl.find('\n', pos), jsonl.size());
        const std::string_view line = jsonl.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (trim(line).empty()) continue;
        try {
            AnnotationRecord r;
            from_json(nlohmann::json::parse(line), r);
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
    return parse_annotations(read_text_file(path), path.string());
}

std::vector<AnnotationSummary> summarize_annotations(const std::vector<AnnotationRecord>& records,
                                                     std::uint64_t seed) {
    std::map<std::pair<AnnotationDimension, int>, std::vector<double>> groups;
    for (const auto& r : records)
        if (r.rating) groups[{r.dimension, r.turn_index}].push_back(*r.rating);
    std::vector<AnnotationSummary> out;
    for (const auto& [key, values] : groups) {
        const auto label = std::string(to_string(key.first)) + "/" + std::to_string(key.second);
        const auto boot = bootstrap_mean(values, derive_seed(seed, "annotation/" + label),
                                         static_cast<int>(values.size()));
        double sum = 0.0;
        for (double v : values) sum += v;
        out.push_back({key.first, key.second, values.size(), sum / static_cast<double>(values.size()), boot.ci_low,
                       boot.ci_high});
    }
    return out;
}

std::vector<AnnotationRecord> worksheet_rows(const Transcript& transcript) {
    std::vector<AnnotationRecord> out;
    for (const auto dim : {AnnotationDimension::Naturalness, AnnotationDimension::Faithfulness})
        for (const auto& turn : transcript.turns)
            out.push_back({transcript.conversation_id, turn.index, dim, std::nullopt, ""});
    return out;
}

} // namespace latprof
