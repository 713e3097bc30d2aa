#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "streamcheck/backends.hpp"
#include "streamcheck/types.hpp"

namespace streamcheck {

inline constexpr std::size_t kMaxSnippetBytes = 1200;

// Lowercases scheme and host, drops the fragment, the default port, tracking
// parameters (utm_*, fbclid, gclid) and a trailing slash on the path.
std::string canonicalize_url(std::string_view url);
std::string url_host(std::string_view url);

struct GatherOptions {
  std::size_t per_backend_k = 5;
  double deadline = 3.0;
};

struct GatherResult {
  std::vector<EvidenceDoc> docs;  // query-major, then backend order, then result order
  std::size_t calls = 0;
  std::size_t failures = 0;  // errors and timeouts

  // Every call errored (AllBackendsFailed); the claim proceeds with no evidence.
  bool all_failed() const { return calls > 0 && failures == calls; }
};

// Issues every (query, backend) pair concurrently under one shared deadline.
GatherResult gather(const std::vector<std::string>& queries, const std::string& claim_id,
                    const std::string& language, const std::vector<NamedSearchBackend>& backends,
                    const GatherOptions& options = {});

std::set<std::string> default_blocklist();
// One registrable domain per line; '#' starts a comment.
std::set<std::string> load_blocklist(const std::string& path);

struct FilteredEvidence {
  std::vector<EvidenceDoc> evidence;
  std::vector<EvidenceDoc> previous_fact_checks;  // internal-index hits, never NLI evidence
};

FilteredEvidence filter_factcheck_sites(const std::vector<EvidenceDoc>& docs, const std::set<std::string>& blocklist,
                                        const std::string& internal_index = "factindex");

// Strict total order used to pick a group survivor: longest snippet, then
// smallest canonical_url, then the remaining fields.
bool better_survivor(const EvidenceDoc& a, const EvidenceDoc& b);

// Passes: exact canonical_url, exact case-folded title, snippet 3-shingle
// Jaccard >= jaccard_threshold (transitively closed). Output ordered by
// canonical_url.
std::vector<EvidenceDoc> dedupe(const std::vector<EvidenceDoc>& docs, double jaccard_threshold = 0.7);

struct RankedEvidence {
  EvidenceDoc doc;
  double relevance = 0.0;
  std::size_t rank = 0;  // 1-based
};

struct RankOptions {
  std::size_t top_k = 5;
  double min_relevance = 0.1;
  double deadline = 3.0;
};

// Scores concurrently; a failed score drops that doc. Sorted by descending
// relevance, ties by smaller canonical_url.
std::vector<RankedEvidence> rank(const std::string& claim_text, const std::vector<EvidenceDoc>& docs,
                                 const std::shared_ptr<RankerBackend>& ranker, const RankOptions& options = {});

}  // namespace streamcheck
