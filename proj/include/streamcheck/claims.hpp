#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "streamcheck/backends.hpp"
#include "streamcheck/prompts.hpp"

namespace streamcheck {

struct Sentence {
  std::string text;
  std::size_t offset = 0;  // byte offset of text within the split input
  std::string segment_id;
  std::string speaker_id;
  double t_start = 0.0;
  double t_end = 0.0;
};

// Rule-based splitter: breaks after . ! ? (and any closing quotes) when the
// next non-space character is a capital letter. Listed abbreviations and
// single-letter initials never end a sentence.
std::vector<Sentence> split_sentences(std::string_view text);

std::string strip_quotes(std::string_view s);

// English name for a BCP-47 tag ("en" -> "English"); unknown tags pass through.
std::string language_name(const std::string& tag);

struct ClaimOptions {
  double checkworthy_threshold = 0.5;
  int num_questions = 2;
  std::size_t context_sentences = 2;
  double backend_deadline = 5.0;
  double dedup_threshold = 0.8;
  double dedup_window = 600.0;
  std::size_t max_in_flight = 4;

  void validate() const;
};

// Fail-open: any backend failure or empty output returns the raw sentence.
std::string normalize(const std::string& sentence, const std::vector<std::string>& context,
                      const std::shared_ptr<TextGenBackend>& gen, const PromptStore& prompts,
                      const std::string& language, double deadline = 5.0);

struct Checkworthiness {
  bool checkworthy = false;
  double score = 0.0;
};

// Throws BackendError; the caller skips the sentence.
Checkworthiness detect_checkworthy(const std::string& text, const std::shared_ptr<ClassifierBackend>& clf,
                                   double threshold = 0.5, double deadline = 5.0);

// First standalone capital A..H in the response; otherwise 'H'.
char parse_topic(std::string_view response);
char assign_topic(const std::string& text, const std::shared_ptr<TextGenBackend>& gen,
                  const PromptStore& prompts, double deadline = 5.0);
std::string topic_name(char topic);

// Lines of the form "Question <k>: <text>", first num_questions kept.
std::vector<std::string> parse_questions(std::string_view response, int num_questions);
std::vector<std::string> decompose(const std::string& claim_text, const std::shared_ptr<TextGenBackend>& gen,
                                   const PromptStore& prompts, int num_questions = 2,
                                   const std::string& language = "en", double deadline = 5.0);

struct Claim {
  std::string claim_id;
  std::string raw_text;
  std::string normalized_text;
  std::string speaker_id;
  std::string segment_id;
  double t_start = 0.0;
  double t_end = 0.0;
  double checkworthy_score = 0.0;
  char topic = 'H';
  std::vector<std::string> questions;
  std::string language = "en";
};

// Suppresses a claim whose normalized text is a near duplicate (3-shingle
// Jaccard >= threshold) of one admitted within the last `window` seconds of
// stream time. Claims must be offered in non-decreasing t_start order.
class ClaimDeduplicator {
 public:
  explicit ClaimDeduplicator(double threshold = 0.8, double window = 600.0)
      : threshold_(threshold), window_(window) {}

  // True when admitted (and remembered); false when suppressed.
  bool admit(const std::string& normalized_text, double t_start);

 private:
  struct Entry {
    double t_start;
    std::set<std::string> shingles;
  };
  double threshold_;
  double window_;
  std::deque<Entry> recent_;
};

}  // namespace streamcheck
