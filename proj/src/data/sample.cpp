#include "trigcopy/data/sample.hpp"

#include <map>
#include <tuple>

namespace trigcopy {

std::string DataSample::signature() const {
  std::string key = intent;
  std::string last;
  bool first = true;
  for (const auto& f : fields) {
    if (!first && f == last) continue;
    key += first ? "|" : "+";
    key += f;
    last = f;
    first = false;
  }
  return key;
}

void DataSample::validate() const {
  if (fields.size() != values.size()) {
    throw std::invalid_argument("sample: field/value sequences differ in length (" + std::to_string(fields.size()) +
                                " vs " + std::to_string(values.size()) + ")");
  }
  if (values.empty()) throw std::invalid_argument("sample: empty context dictionary");
  for (const auto& ref : references) {
    if (ref.empty()) throw std::invalid_argument("sample: empty reference");
  }
  if (trigger.empty()) throw std::invalid_argument("sample: empty trigger");
}

std::vector<DataSample> expand_references(const std::vector<DataSample>& samples) {
  std::vector<DataSample> out;
  for (const auto& s : samples) {
    for (const auto& ref : s.references) {
      DataSample pair = s;
      pair.references = {ref};
      out.push_back(std::move(pair));
    }
  }
  return out;
}

std::vector<DataSample> group_references(const std::vector<DataSample>& samples) {
  using Key = std::tuple<std::string, std::string, TokenSequence, TokenSequence>;
  std::map<Key, std::size_t> index;
  std::vector<DataSample> out;
  for (const auto& s : samples) {
    Key key{s.trigger, s.intent, s.fields, s.values};
    auto [it, inserted] = index.try_emplace(key, out.size());
    if (inserted) {
      out.push_back(s);
    } else {
      auto& refs = out[it->second].references;
      refs.insert(refs.end(), s.references.begin(), s.references.end());
    }
  }
  return out;
}

}  // namespace trigcopy
