#include "streamcheck/backends.hpp"

#include "streamcheck/error.hpp"

namespace streamcheck {

void BackendSet::validate() const {
  if (!vad) throw InvalidConfig("backend set is missing vad");
  if (!asr) throw InvalidConfig("backend set is missing asr");
  if (!segmentation) throw InvalidConfig("backend set is missing segmentation");
  if (!embedding) throw InvalidConfig("backend set is missing embedding");
  if (!classifier) throw InvalidConfig("backend set is missing classifier");
  if (!textgen) throw InvalidConfig("backend set is missing textgen");
  if (search.empty()) throw InvalidConfig("backend set is missing search");
  for (const auto& s : search)
    if (!s.backend) throw InvalidConfig("search backend '" + s.name + "' is null");
  if (!ranker) throw InvalidConfig("backend set is missing ranker");
  if (!nli) throw InvalidConfig("backend set is missing nli");
}

}  // namespace streamcheck
