#include "trigcopy/data/synthetic.hpp"

#include "trigcopy/data/parsers.hpp"
#include "trigcopy/data/tokenizer.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>

namespace trigcopy {
namespace {

using Rng = std::mt19937_64;

template <typename T>
const T& pick(const std::vector<T>& options, Rng& rng) {
  std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
  return options[d(rng)];
}

bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

// Comma list with "and" before the last item.
std::string enumerate(const std::vector<std::string>& parts) {
  if (parts.empty()) return {};
  if (parts.size() == 1) return parts[0];
  std::vector<std::string> head(parts.begin(), parts.end() - 1);
  return join(head, ", ") + " and " + parts.back();
}

DataSample make_sample(const std::string& intent, const std::vector<FieldValue>& items,
                       const std::vector<std::string>& references) {
  DataSample s;
  s.intent = intent;
  for (const auto& item : items) {
    const std::string field = normalize_field_name(item.field);
    for (auto& token : tokenize(item.value)) {
      s.fields.push_back(field);
      s.values.push_back(std::move(token));
    }
  }
  for (const auto& r : references) s.references.push_back(tokenize(r));
  return s;
}

template <typename Realize>
std::vector<std::string> distinct_references(std::size_t wanted, Rng& rng, Realize realize) {
  std::vector<std::string> refs;
  std::set<std::string> seen;
  for (std::size_t attempt = 0; refs.size() < wanted && attempt < 20 * wanted; ++attempt) {
    auto r = realize(rng);
    if (seen.insert(r).second) refs.push_back(std::move(r));
  }
  return refs;
}

// Restaurant domain.

const std::vector<std::string> kNames = {
    "The Eagle",  "Green Man",        "Alimentum",     "The Vaults",      "Zizzi",        "Wildwood",
    "Aromi",      "Bibimbap House",   "Blue Spice",    "Browns Cambridge", "Clowns",      "Cocum",
    "Cotto",      "Fitzbillies",      "Giraffe",       "Loch Fyne",       "Strada",       "The Mill",
    "The Phoenix", "The Plough",      "The Punter",    "The Rice Boat",   "The Waterman", "The Wrestlers",
    "The Golden Curry", "The Olive Grove", "The Cricketers", "The Dumpling Tree", "Midsummer House",
    "Taste of Cambridge"};
const std::vector<std::string> kNear = {"Café Adriatic", "Café Brazil",     "Café Rouge",   "Crowne Plaza Hotel",
                                        "Express by Holiday Inn", "Burger King", "Raja Indian Cuisine",
                                        "Rainbow Vegetarian Café", "The Bakers", "The Portland Arms", "The Sorrento",
                                        "Yippee Noodle Bar", "All Bar One", "Avalon", "Clare Hall", "Ranch"};
const std::vector<std::string> kEatType = {"restaurant", "pub", "coffee shop"};
const std::vector<std::string> kFood = {"English", "Italian", "French", "Chinese", "Indian", "Japanese", "Fast food"};
const std::vector<std::string> kPrice = {"cheap", "moderate", "high", "less than £20", "£20-25", "more than £30"};
const std::vector<std::string> kRating = {"low", "average", "high", "1 out of 5", "3 out of 5", "5 out of 5"};
const std::vector<std::string> kArea = {"city centre", "riverside"};

struct Restaurant {
  std::string name;
  std::optional<std::string> eat_type, food, price, rating, area, family, near;
};

std::string lower_first(std::string s) {
  if (s == "Fast food") return "fast food";
  return s;
}

std::string price_phrase(const std::string& price, Rng& rng) {
  const bool band = price == "cheap" || price == "moderate" || price == "high";
  if (band) return coin(rng) ? "with " + price + " prices" : "in the " + price + " price range";
  return coin(rng) ? "with prices " + price : "with a price range of " + price;
}

std::string rating_phrase(const std::string& rating, Rng& rng) {
  return coin(rng) ? "with a " + rating + " customer rating" : "rated " + rating + " by customers";
}

std::string area_phrase(const std::string& area, Rng& rng) {
  return coin(rng) ? "in the " + area : "in the " + area + " area";
}

std::string near_phrase(const std::string& near, Rng& rng) {
  return (coin(rng) ? "near " : "close to ") + near;
}

std::string family_adjective(const std::string& family, Rng& rng) {
  const std::string kind = coin(rng) ? "family friendly" : "kid friendly";
  return family == "yes" ? kind : "non " + kind;
}

std::string realize_restaurant(const Restaurant& r, Rng& rng) {
  const std::string type = r.eat_type.value_or("place");
  std::string noun = type;
  if (r.food) noun = lower_first(*r.food) + " " + noun;
  if (r.family) noun = family_adjective(*r.family, rng) + " " + noun;
  const std::string article = (noun[0] == 'a' || noun[0] == 'e' || noun[0] == 'i' || noun[0] == 'o' || noun[0] == 'E' ||
                               noun[0] == 'I')
                                  ? "an "
                                  : "a ";

  std::vector<int> styles = {0, 1, 2};
  if (r.area) styles.push_back(3);
  if (r.near) styles.push_back(4);
  if (r.food) styles.push_back(5);
  if (r.rating) styles.push_back(6);
  const int style = styles[uniform_index(rng, styles.size())];

  std::vector<std::string> tail;
  if (r.rating && style != 6) tail.push_back(rating_phrase(*r.rating, rng));
  if (r.price) tail.push_back(price_phrase(*r.price, rng));
  std::shuffle(tail.begin(), tail.end(), rng);

  std::vector<std::string> place;
  if (r.area && style != 3) place.push_back(area_phrase(*r.area, rng));
  if (r.near && style != 4) place.push_back(near_phrase(*r.near, rng));

  std::string body = join(place, " ");
  std::string extra = enumerate(tail);
  auto sentence = [](std::string s) { return s + " ."; };

  switch (style) {
    case 0: {
      std::string s = r.name + " is " + article + noun;
      if (!body.empty()) s += " " + body;
      if (!extra.empty()) s += " " + extra;
      return sentence(s);
    }
    case 1: {
      std::string s = "There is " + article + noun + " called " + r.name;
      if (!body.empty()) s += " " + body;
      s = sentence(s);
      if (!extra.empty()) s += " It is " + join(tail, " and ") + " .";
      return s;
    }
    case 2: {
      std::string s = r.name;
      if (!body.empty()) s += " , located " + body + " ,";
      s += " is " + article + noun;
      if (!extra.empty()) s += " " + extra;
      return sentence(s);
    }
    case 3: {
      std::string s = "In the " + *r.area + " " + (r.near ? near_phrase(*r.near, rng) + " " : "") + "there is " +
                      article + noun + " called " + r.name;
      if (!extra.empty()) s += " " + extra;
      return sentence(s);
    }
    case 4: {
      std::string s = "Near " + *r.near + " " + (r.area ? area_phrase(*r.area, rng) + " " : "") + "is " + article +
                      noun + " named " + r.name;
      if (!extra.empty()) s += " " + extra;
      return sentence(s);
    }
    case 5: {
      std::string s = "For " + lower_first(*r.food) + " food , " + r.name + " is " + article + noun;
      if (!body.empty()) s += " " + body;
      if (!extra.empty()) s += " " + extra;
      return sentence(s);
    }
    default: {
      std::string s = "With a " + *r.rating + " customer rating , " + r.name + " is " + article + noun;
      if (!body.empty()) s += " " + body;
      if (!extra.empty()) s += " " + extra;
      return sentence(s);
    }
  }
}

// Messaging domain.

const std::vector<std::string> kPeople = {"John",  "Sarah", "William", "Lucas",  "Noah",   "Oliver", "Liam",
                                          "Emma",  "Henry", "Jacob",   "Olivia", "Mia",    "Ethan",  "Ava",
                                          "Sophia", "James", "Amelia", "Benjamin", "Isabella", "Alexander"};
const std::vector<std::string> kMailUsers = {"noah", "henry", "alexander", "benjamin", "lucas", "emma", "mia", "ethan"};
const std::vector<std::string> kMailHosts = {"gmail.com", "example.org", "mail.com"};
const std::vector<std::string> kPlaces = {"SMS Hospital Jaipur", "Central Park, NYC", "Board Room", "Starbucks",
                                          "Saint Albert Hall", "Saint Albert Hall Jaisalmer", "City Library",
                                          "104 board room", "Green Park Metro", "Hotel Marine Plaza"};
const std::vector<std::string> kTitles = {"Staff Call",  "Success Strategies", "Moving to Mastery", "Everything Counts",
                                          "Agenda Confrontation", "Quarterly Review", "Design Sync", "Budget Planning"};
const std::vector<std::string> kWeekdays = {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday"};
const std::vector<std::string> kMonths = {"January", "February", "March", "April", "May", "June",
                                          "July", "August", "September", "October", "November", "December"};
const std::vector<std::string> kOccasions = {"New Year", "Christmas", "Diwali", "Birthday", "Anniversary",
                                             "Eid", "Thanksgiving", "Holi", "Easter"};

std::string digits(Rng& rng, int n) {
  std::string s;
  s.push_back(static_cast<char>('6' + uniform_index(rng, 4)));
  while (static_cast<int>(s.size()) < n) s.push_back(static_cast<char>('0' + uniform_index(rng, 10)));
  return s;
}

std::string clock_time(Rng& rng, int hour) {
  static const std::vector<std::string> minutes = {"00", "15", "25", "30", "45", "50"};
  return std::to_string(hour) + ":" + pick(minutes, rng);
}

std::string date_text(Rng& rng) {
  const int day = 1 + static_cast<int>(uniform_index(rng, 28));
  const std::string& month = pick(kMonths, rng);
  if (coin(rng)) return pick(kWeekdays, rng) + " " + std::to_string(day) + " " + month + " 2022";
  const char* suffix = (day % 10 == 1 && day != 11) ? "st" : (day % 10 == 2 && day != 12) ? "nd"
                       : (day % 10 == 3 && day != 13) ? "rd" : "th";
  return std::to_string(day) + suffix + " " + month + " 2022";
}

struct Combination {
  std::string intent;
  std::vector<std::string> fields;
  double weight;
};

const std::vector<Combination>& combinations() {
  static const std::vector<Combination> table = {
      {"CONTACT::ACT", {"Contact", "Email", "Name"}, 875},
      {"CONTACT::ACT", {"Contact", "Name"}, 975},
      {"CONTACT::ACT", {"Email", "Name"}, 750},
      {"CONTACT::SHARE", {"Contact", "Email", "Name"}, 875},
      {"CONTACT::SHARE", {"Contact", "Name"}, 975},
      {"CONTACT::SHARE", {"Email", "Name"}, 750},
      {"LOCATION::SHARE", {"Location"}, 570},
      {"CALENDAR::ACT", {"Date", "Location", "Title", "Name", "ID", "TimeStart", "TimeEnd"}, 2210},
      {"CALENDAR::ACT", {"Date", "Location", "Title", "ID", "TimeStart", "TimeEnd"}, 680},
      {"CALENDAR::ACT", {"Date", "Title", "ID", "TimeStart", "TimeEnd"}, 470},
      {"CALENDAR::ACT", {"Location", "Title", "Name", "ID"}, 495},
      {"CALENDAR::ACT", {"Location", "Name", "ID"}, 200},
      {"CALENDAR::ACT", {"Name", "ID", "TimeStart"}, 200},
      {"CALENDAR::SHARE", {"Date", "Location", "Title", "Name", "ID", "TimeStart", "TimeEnd"}, 2210},
      {"CALENDAR::SHARE", {"Date", "Location", "Title", "ID", "TimeStart", "TimeEnd"}, 680},
      {"CALENDAR::SHARE", {"Date", "Title", "ID", "TimeStart", "TimeEnd"}, 470},
      {"CALENDAR::SHARE", {"Location", "Title", "Name", "ID"}, 495},
      {"CALENDAR::SHARE", {"Location", "Name", "ID"}, 200},
      {"CALENDAR::SHARE", {"Name", "ID", "TimeStart"}, 200},
      {"OCCASION::SHARE", {"Name", "Occasion"}, 2040},
  };
  return table;
}

using Record = std::map<std::string, std::string>;

std::string markup(const std::string& tag, const std::string& value) {
  return "T_" + tag + "_BEG " + value + " T_" + tag + "_END";
}

std::string realize_contact_act(const Record& r) {
  const bool phone = r.contains("Contact");
  const bool mail = r.contains("Email");
  const std::string kind = phone && mail ? "CONTACT_BOTH" : phone ? "CONTACT_CALL" : "CONTACT_MAIL";
  std::vector<std::string> inner;
  if (phone) inner.push_back(markup("NUMBER", r.at("Contact")));
  if (mail) inner.push_back(markup("EMAIL", r.at("Email")));
  inner.push_back(markup("NAME", r.at("Name")));
  return markup(kind, join(inner, " "));
}

std::string realize_calendar_act(const Record& r, const std::vector<std::string>& fields) {
  static const std::map<std::string, std::string> tags = {{"Date", "DATE"}, {"Location", "LOC"},
                                                          {"Title", "TITLE"}, {"Name", "NAME"},
                                                          {"ID", "ID"},     {"TimeStart", "TIMES"},
                                                          {"TimeEnd", "TIMEE"}};
  std::vector<std::string> inner;
  for (const auto& f : fields) inner.push_back(markup(tags.at(f), r.at(f)));
  return markup("MEETING_EDIT", join(inner, " "));
}

std::string realize_contact_share(const Record& r, Rng& rng) {
  const std::string& name = r.at("Name");
  const bool phone = r.contains("Contact");
  const bool mail = r.contains("Email");
  if (phone && mail) {
    switch (uniform_index(rng, 3)) {
      case 0: return name + "'s contact number is " + r.at("Contact") + " and email address is " + r.at("Email");
      case 1: return "You can reach " + name + " at " + r.at("Contact") + " or " + r.at("Email");
      default: return "Contact " + name + " on " + r.at("Contact") + " or mail at " + r.at("Email");
    }
  }
  if (phone) {
    switch (uniform_index(rng, 3)) {
      case 0: return "You can call " + name + " at " + r.at("Contact");
      case 1: return "You can connect with " + name + " at " + r.at("Contact");
      default: return name + "'s number is " + r.at("Contact");
    }
  }
  switch (uniform_index(rng, 3)) {
    case 0: return name + "'s email address is " + r.at("Email");
    case 1: return "You can mail " + name + " at " + r.at("Email");
    default: return "Write to " + name + " at " + r.at("Email");
  }
}

std::string realize_location_share(const Record& r, Rng& rng) {
  switch (uniform_index(rng, 3)) {
    case 0: return "Right now, I am at " + r.at("Location");
    case 1: return "I am at " + r.at("Location");
    default: return "Currently at " + r.at("Location");
  }
}

std::string realize_calendar_share(const Record& r, Rng& rng) {
  std::vector<std::string> parts;
  if (r.contains("Name")) parts.push_back("with " + r.at("Name"));
  if (r.contains("Date")) parts.push_back("on " + r.at("Date"));
  if (r.contains("TimeEnd")) parts.push_back("from " + r.at("TimeStart") + " to " + r.at("TimeEnd"));
  else if (r.contains("TimeStart")) parts.push_back("at " + r.at("TimeStart"));
  if (r.contains("Location")) parts.push_back("at " + r.at("Location"));
  const std::string rest = join(parts, " ");
  const std::string id = r.at("ID");
  std::vector<int> styles = {0, 1, 2};
  if (r.contains("Title")) styles.push_back(3);
  switch (styles[uniform_index(rng, styles.size())]) {
    case 0: {
      std::string s = "The meeting " + id + " has been scheduled " + rest;
      if (r.contains("Title")) s += " regarding " + r.at("Title");
      return s;
    }
    case 1: {
      std::string s = "You have a meeting " + id + " " + rest;
      if (r.contains("Title")) s += " regarding " + r.at("Title");
      return s;
    }
    case 2: {
      std::string s = id + " is scheduled " + rest;
      if (r.contains("Title")) s += " for " + r.at("Title");
      return s;
    }
    default: return "Meeting for " + r.at("Title") + " " + rest + " , ID " + id;
  }
}

std::string realize_occasion(const Record& r, Rng& rng) {
  const std::string& name = r.at("Name");
  const std::string& occasion = r.at("Occasion");
  switch (uniform_index(rng, 4)) {
    case 0: return "Happy " + occasion + ", " + name;
    case 1: return "Wish you a very happy " + occasion + ", " + name;
    case 2: return name + ", wishing you a happy " + occasion;
    default: return "Dear " + name + ", have a wonderful " + occasion;
  }
}

}  // namespace

std::vector<DataSample> synthetic_e2e(std::size_t count, std::uint64_t seed, std::size_t references_per_sample) {
  Rng rng(seed);
  std::vector<DataSample> out;
  out.reserve(count);
  const std::vector<std::string> optional_fields = {"eatType", "food",   "priceRange",     "customer rating",
                                                    "area",    "familyFriendly", "near"};
  while (out.size() < count) {
    Restaurant r;
    r.name = pick(kNames, rng);
    const std::size_t extra = 2 + uniform_index(rng, 6);
    std::vector<std::string> chosen = optional_fields;
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(extra);
    std::vector<FieldValue> items = {{"name", r.name}};
    for (const auto& f : optional_fields) {
      if (std::find(chosen.begin(), chosen.end(), f) == chosen.end()) continue;
      std::string value;
      if (f == "eatType") r.eat_type = value = pick(kEatType, rng);
      if (f == "food") r.food = value = pick(kFood, rng);
      if (f == "priceRange") r.price = value = pick(kPrice, rng);
      if (f == "customer rating") r.rating = value = pick(kRating, rng);
      if (f == "area") r.area = value = pick(kArea, rng);
      if (f == "familyFriendly") r.family = value = coin(rng) ? "yes" : "no";
      if (f == "near") r.near = value = pick(kNear, rng);
      items.push_back({f, value});
    }
    auto refs = distinct_references(std::max<std::size_t>(references_per_sample, 1), rng,
                                    [&](Rng& g) { return realize_restaurant(r, g); });
    out.push_back(make_sample(std::string(IntentSet::kDummyLabel), items, refs));
  }
  return out;
}

std::vector<DataSample> synthetic_custom(std::size_t count, std::uint64_t seed, std::size_t references_per_sample) {
  Rng rng(seed);
  std::vector<double> weights;
  for (const auto& c : combinations()) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> which(weights.begin(), weights.end());

  std::vector<DataSample> out;
  out.reserve(count);
  while (out.size() < count) {
    const Combination& combo = combinations()[which(rng)];
    Record record;
    const int start_hour = 9 + static_cast<int>(uniform_index(rng, 9));
    for (const auto& f : combo.fields) {
      if (f == "Name") record[f] = pick(kPeople, rng);
      if (f == "Contact") record[f] = digits(rng, 10);
      if (f == "Email") record[f] = pick(kMailUsers, rng) + "@" + pick(kMailHosts, rng);
      if (f == "Location") record[f] = pick(kPlaces, rng);
      if (f == "Title") record[f] = pick(kTitles, rng);
      if (f == "Date") record[f] = date_text(rng);
      if (f == "ID") record[f] = "MOID_" + digits(rng, 7);
      if (f == "TimeStart") record[f] = clock_time(rng, start_hour);
      if (f == "TimeEnd") record[f] = clock_time(rng, start_hour + 1);
      if (f == "Occasion") record[f] = pick(kOccasions, rng);
    }
    std::vector<FieldValue> items;
    for (const auto& f : combo.fields) items.push_back({f, record[f]});

    auto realize = [&](Rng& g) -> std::string {
      if (combo.intent == "CONTACT::ACT") return realize_contact_act(record);
      if (combo.intent == "CALENDAR::ACT") return realize_calendar_act(record, combo.fields);
      if (combo.intent == "CONTACT::SHARE") return realize_contact_share(record, g);
      if (combo.intent == "LOCATION::SHARE") return realize_location_share(record, g);
      if (combo.intent == "CALENDAR::SHARE") return realize_calendar_share(record, g);
      return realize_occasion(record, g);
    };
    auto refs = distinct_references(std::max<std::size_t>(references_per_sample, 1), rng, realize);
    out.push_back(make_sample(combo.intent, items, refs));
  }
  return out;
}

}  // namespace trigcopy
