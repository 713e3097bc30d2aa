#include "streamcheck/evidence.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <tuple>

#include "streamcheck/error.hpp"
#include "streamcheck/util/async_call.hpp"
#include "streamcheck/util/text.hpp"

namespace streamcheck {

namespace {

bool tracking_param(std::string_view key) {
  const std::string k = text::to_lower_ascii(key);
  return k.rfind("utm_", 0) == 0 || k == "fbclid" || k == "gclid";
}

double wall_seconds() {
  using namespace std::chrono;
  return duration<double>(system_clock::now().time_since_epoch()).count();
}

std::string casefold(std::string_view s) {
  // Whitespace runs collapse so cosmetic spacing does not defeat the title pass.
  std::string out;
  bool space = false;
  for (char c : text::trim(s)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

template <typename Key>
std::vector<EvidenceDoc> keep_best_by(const std::vector<EvidenceDoc>& docs, Key key) {
  std::map<std::string, EvidenceDoc> best;
  std::vector<EvidenceDoc> passthrough;
  for (const auto& d : docs) {
    const std::string k = key(d);
    if (k.empty()) {
      passthrough.push_back(d);
      continue;
    }
    auto [it, inserted] = best.emplace(k, d);
    if (!inserted && better_survivor(d, it->second)) it->second = d;
  }
  for (auto& [k, d] : best) passthrough.push_back(std::move(d));
  return passthrough;
}

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::vector<std::size_t> parent;
};

}  // namespace

std::string canonicalize_url(std::string_view url) {
  std::string u = text::trim(url);
  if (auto hash = u.find('#'); hash != std::string::npos) u.erase(hash);

  std::string scheme;
  std::string rest = u;
  if (auto p = u.find("://"); p != std::string::npos) {
    scheme = text::to_lower_ascii(u.substr(0, p));
    rest = u.substr(p + 3);
  }
  const auto path_at = rest.find_first_of("/?");
  std::string authority = text::to_lower_ascii(rest.substr(0, path_at));
  std::string tail = path_at == std::string::npos ? "" : rest.substr(path_at);
  if ((scheme == "http" && authority.size() > 3 && authority.compare(authority.size() - 3, 3, ":80") == 0) ||
      (scheme == "https" && authority.size() > 4 && authority.compare(authority.size() - 4, 4, ":443") == 0)) {
    authority.erase(authority.rfind(':'));
  }

  std::string path = tail, query;
  if (auto q = tail.find('?'); q != std::string::npos) {
    path = tail.substr(0, q);
    query = tail.substr(q + 1);
  }
  std::string kept;
  std::size_t pos = 0;
  while (pos <= query.size() && !query.empty()) {
    auto amp = query.find('&', pos);
    if (amp == std::string::npos) amp = query.size();
    const std::string param = query.substr(pos, amp - pos);
    pos = amp + 1;
    if (param.empty() || tracking_param(param.substr(0, param.find('=')))) continue;
    kept += (kept.empty() ? "" : "&") + param;
  }
  while (!path.empty() && path.back() == '/') path.pop_back();

  std::string out = scheme.empty() ? authority : scheme + "://" + authority;
  out += path;
  if (!kept.empty()) out += "?" + kept;
  return out;
}

std::string url_host(std::string_view url) {
  std::string_view rest = url;
  if (auto p = rest.find("://"); p != std::string_view::npos) rest = rest.substr(p + 3);
  rest = rest.substr(0, rest.find_first_of("/?#"));
  if (auto at = rest.rfind('@'); at != std::string_view::npos) rest = rest.substr(at + 1);
  rest = rest.substr(0, rest.find(':'));
  return text::to_lower_ascii(rest);
}

GatherResult gather(const std::vector<std::string>& queries, const std::string& claim_id,
                    const std::string& language, const std::vector<NamedSearchBackend>& backends,
                    const GatherOptions& options) {
  if (backends.empty()) throw InvalidConfig("gather needs at least one search backend");
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(options.deadline));

  struct Pending {
    std::string backend_name;
    AsyncCall<std::vector<EvidenceDoc>> call;
  };
  std::vector<Pending> pending;
  for (const auto& q : queries) {
    for (const auto& b : backends) {
      SearchQuery query{q, language, options.per_backend_k, claim_id};
      auto backend = b.backend;
      pending.push_back({b.name, AsyncCall<std::vector<EvidenceDoc>>::start(
                                     [backend, query] { return backend->search(query); })});
    }
  }

  GatherResult result;
  result.calls = pending.size();
  for (auto& p : pending) {
    std::vector<EvidenceDoc> docs;
    try {
      docs = p.call.get_until(deadline);
    } catch (const std::exception&) {
      ++result.failures;
      continue;
    }
    const double now = wall_seconds();
    if (docs.size() > options.per_backend_k) docs.resize(options.per_backend_k);
    for (auto& d : docs) {
      d.canonical_url = canonicalize_url(d.url);
      d.snippet = text::utf8_truncate(d.snippet, kMaxSnippetBytes);
      d.source_backend = p.backend_name;
      d.retrieved_at = now;
      result.docs.push_back(std::move(d));
    }
  }
  return result;
}

std::set<std::string> default_blocklist() {
  return {"politifact.com", "snopes.com", "factcheck.org", "fullfact.org"};
}

std::set<std::string> load_blocklist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read blocklist: " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = text::to_lower_ascii(text::trim(line));
    if (!line.empty()) out.insert(line);
  }
  return out;
}

FilteredEvidence filter_factcheck_sites(const std::vector<EvidenceDoc>& docs, const std::set<std::string>& blocklist,
                                        const std::string& internal_index) {
  auto blocked = [&](const std::string& host) {
    for (const auto& domain : blocklist) {
      if (host == domain) return true;
      if (host.size() > domain.size() && host.compare(host.size() - domain.size(), domain.size(), domain) == 0 &&
          host[host.size() - domain.size() - 1] == '.')
        return true;
    }
    return false;
  };
  FilteredEvidence out;
  for (const auto& d : docs) {
    if (d.source_backend == internal_index) {
      out.previous_fact_checks.push_back(d);
    } else if (!blocked(url_host(d.canonical_url.empty() ? d.url : d.canonical_url))) {
      out.evidence.push_back(d);
    }
  }
  return out;
}

bool better_survivor(const EvidenceDoc& a, const EvidenceDoc& b) {
  if (a.snippet.size() != b.snippet.size()) return a.snippet.size() > b.snippet.size();
  return std::tie(a.canonical_url, a.url, a.title, a.snippet, a.source_backend, a.retrieved_at) <
         std::tie(b.canonical_url, b.url, b.title, b.snippet, b.source_backend, b.retrieved_at);
}

std::vector<EvidenceDoc> dedupe(const std::vector<EvidenceDoc>& docs, double jaccard_threshold) {
  auto by_url = keep_best_by(docs, [](const EvidenceDoc& d) {
    return d.canonical_url.empty() ? canonicalize_url(d.url) : d.canonical_url;
  });
  auto by_title = keep_best_by(by_url, [](const EvidenceDoc& d) { return casefold(d.title); });

  std::vector<std::set<std::string>> sh;
  sh.reserve(by_title.size());
  for (const auto& d : by_title) sh.push_back(text::shingles(d.snippet, 3));
  UnionFind uf(by_title.size());
  for (std::size_t i = 0; i < by_title.size(); ++i)
    for (std::size_t j = i + 1; j < by_title.size(); ++j)
      if (text::jaccard(sh[i], sh[j]) >= jaccard_threshold) uf.unite(i, j);

  std::map<std::size_t, std::size_t> best;  // root -> index
  for (std::size_t i = 0; i < by_title.size(); ++i) {
    auto [it, inserted] = best.emplace(uf.find(i), i);
    if (!inserted && better_survivor(by_title[i], by_title[it->second])) it->second = i;
  }
  std::vector<EvidenceDoc> out;
  for (const auto& [root, idx] : best) out.push_back(by_title[idx]);
  std::sort(out.begin(), out.end(), [](const EvidenceDoc& a, const EvidenceDoc& b) {
    if (a.canonical_url != b.canonical_url) return a.canonical_url < b.canonical_url;
    return better_survivor(a, b);
  });
  return out;
}

std::vector<RankedEvidence> rank(const std::string& claim_text, const std::vector<EvidenceDoc>& docs,
                                 const std::shared_ptr<RankerBackend>& ranker, const RankOptions& options) {
  if (!ranker) throw InvalidConfig("no ranker backend configured");
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(options.deadline));
  std::vector<AsyncCall<double>> calls;
  calls.reserve(docs.size());
  for (const auto& d : docs) {
    calls.push_back(AsyncCall<double>::start(
        [ranker, claim_text, snippet = d.snippet] { return ranker->score(claim_text, snippet); }));
  }
  std::vector<RankedEvidence> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    double score;
    try {
      score = calls[i].get_until(deadline);
    } catch (const std::exception&) {
      continue;
    }
    if (std::isnan(score)) continue;
    score = std::clamp(score, 0.0, 1.0);
    if (score < options.min_relevance) continue;
    out.push_back({docs[i], score, 0});
  }
  std::sort(out.begin(), out.end(), [](const RankedEvidence& a, const RankedEvidence& b) {
    if (a.relevance != b.relevance) return a.relevance > b.relevance;
    if (a.doc.canonical_url != b.doc.canonical_url) return a.doc.canonical_url < b.doc.canonical_url;
    return better_survivor(a.doc, b.doc);
  });
  if (out.size() > options.top_k) out.resize(options.top_k);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

}  // namespace streamcheck
