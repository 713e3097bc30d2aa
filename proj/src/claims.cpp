#include "streamcheck/claims.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "streamcheck/error.hpp"
#include "streamcheck/util/async_call.hpp"
#include "streamcheck/util/text.hpp"

namespace streamcheck {

namespace {

const std::set<std::string>& abbreviations() {
  static const std::set<std::string> list{
      "mr.",   "mrs.", "ms.",  "dr.",  "prof.", "sr.",  "jr.",   "st.",  "vs.",   "etc.", "e.g.",
      "i.e.",  "u.s.", "u.k.", "u.n.", "u.s.a.", "a.m.", "p.m.", "no.", "gen.",  "sen.", "rep.",
      "gov.",  "lt.",  "col.", "sgt.", "capt.", "inc.", "ltd.", "co.",  "corp.", "jan.", "feb.",
      "mar.",  "apr.", "jun.", "jul.", "aug.",  "sep.", "sept.", "oct.", "nov.", "dec.", "approx.",
      "dept.", "est.", "fig.", "mt."};
  return list;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

bool is_closing(std::string_view s, std::size_t i, std::size_t* width) {
  static const char* const kClosers[] = {"\"", "'", ")", "]", "\xE2\x80\x9D", "\xE2\x80\x99"};
  for (const char* c : kClosers) {
    std::string_view cs(c);
    if (s.substr(i, cs.size()) == cs) {
      *width = cs.size();
      return true;
    }
  }
  return false;
}

bool is_opening(std::string_view s, std::size_t i, std::size_t* width) {
  static const char* const kOpeners[] = {"\"", "'", "(", "[", "\xE2\x80\x9C", "\xE2\x80\x98"};
  for (const char* c : kOpeners) {
    std::string_view cs(c);
    if (s.substr(i, cs.size()) == cs) {
      *width = cs.size();
      return true;
    }
  }
  return false;
}

// The whitespace-delimited token ending at `dot` (inclusive), without
// leading opening punctuation.
std::string token_before(std::string_view s, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !is_space(s[b - 1])) --b;
  std::string tok(s.substr(b, dot - b + 1));
  while (!tok.empty() && (tok.front() == '"' || tok.front() == '(' || tok.front() == '\'')) tok.erase(0, 1);
  return text::to_lower_ascii(tok);
}

bool protected_period(std::string_view s, std::size_t dot) {
  const std::string tok = token_before(s, dot);
  if (abbreviations().count(tok)) return true;
  // Single-letter initial such as "J." in "John F. Kennedy".
  return tok.size() == 2 && std::isalpha(static_cast<unsigned char>(tok[0]));
}

void push_sentence(std::string_view s, std::size_t b, std::size_t e, std::vector<Sentence>& out) {
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  if (b == e) return;
  Sentence sentence;
  sentence.text = std::string(s.substr(b, e - b));
  sentence.offset = b;
  out.push_back(std::move(sentence));
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::optional<std::string> complete_safely(const std::shared_ptr<TextGenBackend>& gen, PromptRequest request,
                                           double deadline) {
  if (!gen) return std::nullopt;
  try {
    return call_with_deadline([gen, request = std::move(request)] { return gen->complete(request); },
                              std::chrono::duration<double>(deadline));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<Sentence> split_sentences(std::string_view s) {
  std::vector<Sentence> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t end = i + 1;
    std::size_t w = 0;
    while (end < s.size() && (s[end] == '.' || s[end] == '!' || s[end] == '?')) ++end;
    while (end < s.size() && is_closing(s, end, &w)) end += w;
    std::size_t next = end;
    if (next >= s.size() || !is_space(s[next])) continue;
    while (next < s.size() && is_space(s[next])) ++next;
    while (next < s.size() && is_opening(s, next, &w)) next += w;
    if (next >= s.size() || !is_upper(s[next])) continue;
    if (c == '.' && end == i + 1 && protected_period(s, i)) continue;
    push_sentence(s, start, end, out);
    start = end;
    i = end - 1;
  }
  push_sentence(s, start, s.size(), out);
  return out;
}

std::string strip_quotes(std::string_view s) {
  std::string t = text::trim(s);
  static const std::pair<std::string_view, std::string_view> kPairs[] = {
      {"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"\xE2\x80\x98", "\xE2\x80\x99"}, {"`", "`"}};
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& [open, close] : kPairs) {
      if (t.size() >= open.size() + close.size() && std::string_view(t).substr(0, open.size()) == open &&
          std::string_view(t).substr(t.size() - close.size()) == close) {
        t = text::trim(std::string_view(t).substr(open.size(), t.size() - open.size() - close.size()));
        changed = true;
      }
    }
  }
  return t;
}

std::string language_name(const std::string& tag) {
  static const std::map<std::string, std::string> names{
      {"ar", "Arabic"},  {"de", "German"},     {"en", "English"}, {"es", "Spanish"},  {"fr", "French"},
      {"hi", "Hindi"},   {"it", "Italian"},    {"ja", "Japanese"}, {"nl", "Dutch"},   {"pl", "Polish"},
      {"pt", "Portuguese"}, {"ru", "Russian"}, {"tr", "Turkish"}, {"uk", "Ukrainian"}, {"zh", "Chinese"}};
  const std::string primary = text::to_lower_ascii(tag.substr(0, tag.find('-')));
  auto it = names.find(primary);
  return it == names.end() ? tag : it->second;
}

void ClaimOptions::validate() const {
  if (!(checkworthy_threshold >= 0.0 && checkworthy_threshold <= 1.0))
    throw InvalidConfig("checkworthy_threshold must lie in [0,1]");
  if (num_questions < 1 || num_questions > 5) throw InvalidConfig("num_questions must lie in 1..5");
  if (!(backend_deadline > 0.0)) throw InvalidConfig("claim backend deadline must be positive");
  if (!(dedup_threshold > 0.0 && dedup_threshold <= 1.0)) throw InvalidConfig("dedup_threshold must lie in (0,1]");
  if (!(dedup_window >= 0.0)) throw InvalidConfig("dedup_window must be non-negative");
  if (max_in_flight == 0) throw InvalidConfig("claim max_in_flight must be positive");
}

std::string normalize(const std::string& sentence, const std::vector<std::string>& context,
                      const std::shared_ptr<TextGenBackend>& gen, const PromptStore& prompts,
                      const std::string& language, double deadline) {
  std::vector<std::string> parts = context;
  parts.push_back(sentence);
  PromptRequest request;
  request.template_id = kNormalizeTemplate;
  request.variables = {{"lang", language_name(language)}, {"text", join(parts, " ")}, {"sentence", sentence}};
  request.prompt = prompts.render(request.template_id, request.variables);
  auto out = complete_safely(gen, std::move(request), deadline);
  if (!out) return sentence;
  std::string cleaned = strip_quotes(*out);
  return cleaned.empty() ? sentence : cleaned;
}

Checkworthiness detect_checkworthy(const std::string& text, const std::shared_ptr<ClassifierBackend>& clf,
                                   double threshold, double deadline) {
  if (!clf) throw BackendError("no classifier backend configured");
  const double score = call_with_deadline([clf, text] { return clf->score(text); },
                                          std::chrono::duration<double>(deadline));
  return {score >= threshold, score};
}

char parse_topic(std::string_view response) {
  auto is_letter = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
  for (std::size_t i = 0; i < response.size(); ++i) {
    const char c = response[i];
    if (c < 'A' || c > 'H') continue;
    const bool left_ok = i == 0 || !is_letter(response[i - 1]);
    const bool right_ok = i + 1 == response.size() || !is_letter(response[i + 1]);
    if (left_ok && right_ok) return c;
  }
  return 'H';
}

char assign_topic(const std::string& text, const std::shared_ptr<TextGenBackend>& gen,
                  const PromptStore& prompts, double deadline) {
  PromptRequest request;
  request.template_id = kTopicTemplate;
  request.variables = {{"text", text}};
  request.prompt = prompts.render(request.template_id, request.variables);
  auto out = complete_safely(gen, std::move(request), deadline);
  return out ? parse_topic(*out) : 'H';
}

std::string topic_name(char topic) {
  switch (topic) {
    case 'A': return "War and defence";
    case 'B': return "Economy";
    case 'C': return "Healthcare";
    case 'D': return "Law and order";
    case 'E': return "Immigration";
    case 'F': return "Climate and environment";
    case 'G': return "Politics and election";
    default: return "Other";
  }
}

std::vector<std::string> parse_questions(std::string_view response, int num_questions) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= response.size() && static_cast<int>(out.size()) < num_questions) {
    std::size_t nl = response.find('\n', pos);
    if (nl == std::string_view::npos) nl = response.size();
    const std::string line = text::trim(response.substr(pos, nl - pos));
    pos = nl + 1;
    const std::string lower = text::to_lower_ascii(line);
    if (lower.rfind("question", 0) != 0) continue;
    std::size_t i = 8;
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t digits = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == digits) continue;
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size() || line[i] != ':') continue;
    std::string q = text::trim(std::string_view(line).substr(i + 1));
    if (!q.empty()) out.push_back(std::move(q));
  }
  return out;
}

std::vector<std::string> decompose(const std::string& claim_text, const std::shared_ptr<TextGenBackend>& gen,
                                   const PromptStore& prompts, int num_questions, const std::string& language,
                                   double deadline) {
  if (num_questions < 1 || num_questions > 5) throw InvalidConfig("num_questions must lie in 1..5");
  PromptRequest request;
  request.template_id = kDecomposeTemplate;
  request.variables = {{"lang", language_name(language)},
                       {"num_questions", std::to_string(num_questions)},
                       {"claim", claim_text}};
  request.prompt = prompts.render(request.template_id, request.variables);
  auto out = complete_safely(gen, std::move(request), deadline);
  std::vector<std::string> questions;
  if (out) questions = parse_questions(*out, num_questions);
  if (questions.empty()) questions.push_back(claim_text);
  return questions;
}

bool ClaimDeduplicator::admit(const std::string& normalized_text, double t_start) {
  while (!recent_.empty() && t_start - recent_.front().t_start > window_) recent_.pop_front();
  auto sh = text::shingles(normalized_text, 3);
  for (const auto& e : recent_) {
    if (text::jaccard(sh, e.shingles) >= threshold_) return false;
  }
  recent_.push_back({t_start, std::move(sh)});
  return true;
}

}  // namespace streamcheck
