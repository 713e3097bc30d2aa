#include "streamcheck/verdict.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "streamcheck/claims.hpp"
#include "streamcheck/error.hpp"
#include "streamcheck/util/async_call.hpp"
#include "streamcheck/util/text.hpp"

namespace streamcheck {

namespace {

// Confidence sums closer than this are a tie: values that are equal in exact
// arithmetic (0.1 + 0.2 against 0.3) must not be split by rounding.
constexpr double kConfidenceTieEpsilon = 1e-9;

double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

// Evidence that received a vote, in rank order, at most three.
std::vector<const RankedEvidence*> voted_top3(const ClaimVerdict& verdict, const std::vector<RankedEvidence>& evidence) {
  std::vector<std::size_t> ranks;
  for (const auto& v : verdict.votes) ranks.push_back(v.rank);
  std::sort(ranks.begin(), ranks.end());
  std::vector<const RankedEvidence*> out;
  for (std::size_t r : ranks) {
    if (out.size() == 3) break;
    auto it = std::find_if(evidence.begin(), evidence.end(), [r](const RankedEvidence& e) { return e.rank == r; });
    if (it != evidence.end()) out.push_back(&*it);
  }
  return out;
}

}  // namespace

std::string to_string(NliLabel label) { return label == NliLabel::supported ? "supported" : "refuted"; }

std::string to_string(VerdictLabel label) {
  switch (label) {
    case VerdictLabel::supported: return "Supported";
    case VerdictLabel::refuted: return "Refuted";
    default: return "Unverified";
  }
}

std::string display_name(VerdictLabel label) {
  return label == VerdictLabel::refuted ? "Disputed" : to_string(label);
}

std::vector<EvidenceVote> classify_all(const std::string& claim_text, const std::vector<RankedEvidence>& evidence,
                                       const std::shared_ptr<NliBackend>& nli, double deadline) {
  if (!nli) throw InvalidConfig("no NLI backend configured");
  const auto until =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(deadline));
  std::vector<AsyncCall<NliResult>> calls;
  calls.reserve(evidence.size());
  for (const auto& e : evidence) {
    calls.push_back(AsyncCall<NliResult>::start(
        [nli, claim_text, snippet = e.doc.snippet] { return nli->classify(claim_text, snippet); }));
  }
  std::vector<EvidenceVote> votes;
  for (std::size_t i = 0; i < evidence.size(); ++i) {
    try {
      NliResult r = calls[i].get_until(until);
      if (std::isnan(r.confidence)) continue;  // not a usable vote
      votes.push_back({evidence[i].rank, r.label, std::clamp(r.confidence, 0.0, 1.0)});
    } catch (const std::exception&) {
      // Failures and timeouts cast no vote.
    }
  }
  return votes;
}

ClaimVerdict aggregate(const std::vector<EvidenceVote>& votes) {
  ClaimVerdict v;
  v.votes = votes;
  std::vector<double> s, r;
  for (const auto& vote : votes) (vote.label == NliLabel::supported ? s : r).push_back(vote.confidence);
  v.support_count = s.size();
  v.refute_count = r.size();
  if (votes.empty()) {
    v.label = VerdictLabel::unverified;
  } else if (s.size() != r.size()) {
    v.label = s.size() > r.size() ? VerdictLabel::supported : VerdictLabel::refuted;
  } else {
    v.label = sorted_sum(s) - sorted_sum(r) > kConfidenceTieEpsilon ? VerdictLabel::supported : VerdictLabel::refuted;
  }
  return v;
}

std::string template_justification(const ClaimVerdict& verdict, const std::vector<RankedEvidence>& evidence) {
  const std::size_t n = verdict.votes.size();
  if (verdict.label == VerdictLabel::unverified || n == 0) return "Unverified: no evidence could be classified";
  const std::size_t m = verdict.label == VerdictLabel::supported ? verdict.support_count : verdict.refute_count;
  std::string out = to_string(verdict.label) + " by " + std::to_string(m) + " of " + std::to_string(n) + " sources: ";
  const auto top = voted_top3(verdict, evidence);
  for (std::size_t i = 0; i < top.size(); ++i) {
    if (i) out += "; ";
    out += top[i]->doc.title;
  }
  return out;
}

std::string summarize_justification(const std::string& claim_text, const ClaimVerdict& verdict,
                                    const std::vector<RankedEvidence>& evidence,
                                    const std::shared_ptr<TextGenBackend>& gen, const PromptStore& prompts,
                                    const std::string& language, double deadline) {
  if (verdict.votes.empty() || !gen) return template_justification(verdict, evidence);
  std::string snippets;
  for (const auto* e : voted_top3(verdict, evidence)) {
    snippets += "[" + std::to_string(e->rank) + "] " + e->doc.title + ": " + e->doc.snippet + "\n";
  }
  PromptRequest request;
  request.template_id = kJustifyTemplate;
  request.variables = {{"lang", language_name(language)},
                       {"label", to_string(verdict.label)},
                       {"claim", claim_text},
                       {"claim_id", verdict.claim_id},
                       {"evidence", snippets}};
  request.prompt = prompts.render(request.template_id, request.variables);
  try {
    std::string out = text::trim(call_with_deadline([gen, request] { return gen->complete(request); },
                                                    std::chrono::duration<double>(deadline)));
    if (!out.empty()) return out;
  } catch (const std::exception&) {
  }
  return template_justification(verdict, evidence);
}

}  // namespace streamcheck
