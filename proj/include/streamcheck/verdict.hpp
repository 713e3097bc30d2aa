#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "streamcheck/backends.hpp"
#include "streamcheck/evidence.hpp"
#include "streamcheck/prompts.hpp"

namespace streamcheck {

enum class VerdictLabel { supported, refuted, unverified };

std::string to_string(VerdictLabel label);   // "Supported" | "Refuted" | "Unverified"
std::string display_name(VerdictLabel label);  // Refuted shows as "Disputed"

struct EvidenceVote {
  std::size_t rank = 0;
  NliLabel label = NliLabel::supported;
  double confidence = 0.0;
};

struct ClaimVerdict {
  std::string claim_id;
  VerdictLabel label = VerdictLabel::unverified;
  std::vector<EvidenceVote> votes;
  std::size_t support_count = 0;
  std::size_t refute_count = 0;
  std::string justification;
};

// One concurrent call per evidence; failures and timeouts cast no vote.
// Votes come back in rank order.
std::vector<EvidenceVote> classify_all(const std::string& claim_text, const std::vector<RankedEvidence>& evidence,
                                       const std::shared_ptr<NliBackend>& nli, double deadline = 2.0);

// Zero votes -> Unverified. Otherwise the larger count wins, then the larger
// confidence sum, then Refuted. Confidence sums are accumulated in sorted
// order so the result never depends on vote order.
ClaimVerdict aggregate(const std::vector<EvidenceVote>& votes);

// "<label> by <m> of <n> sources: <title>; ..." over at most three titles.
std::string template_justification(const ClaimVerdict& verdict, const std::vector<RankedEvidence>& evidence);

// Backend summary of the top three voted snippets; the template on failure.
std::string summarize_justification(const std::string& claim_text, const ClaimVerdict& verdict,
                                    const std::vector<RankedEvidence>& evidence,
                                    const std::shared_ptr<TextGenBackend>& gen, const PromptStore& prompts,
                                    const std::string& language = "en", double deadline = 5.0);

}  // namespace streamcheck
