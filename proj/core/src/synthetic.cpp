#include "dicoh/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "dicoh/error.hpp"
#include "dicoh/rng.hpp"
#include "dicoh/tokenizer.hpp"

namespace dicoh {
namespace {

struct Topic {
  std::vector<std::string> nouns;
  std::vector<std::string> verbs;
  std::vector<std::string> adjectives;
  std::vector<std::string> places;
};

const std::vector<Topic>& topics() {
  static const std::vector<Topic> t = {
      {{"apartment", "lease", "landlord", "kitchen", "balcony"}, {"rent", "paint", "clean", "inspect"},
       {"spacious", "quiet", "furnished", "cozy"}, {"agency", "building", "neighborhood"}},
      {{"flight", "ticket", "passport", "suitcase", "seat"}, {"book", "cancel", "pack", "confirm"},
       {"direct", "cheap", "delayed", "overnight"}, {"airport", "terminal", "counter"}},
      {{"steak", "salad", "dessert", "menu", "waiter"}, {"order", "taste", "cook", "share"},
       {"delicious", "spicy", "fresh", "salty"}, {"restaurant", "cafe", "canteen"}},
      {{"sweater", "jacket", "discount", "receipt", "size"}, {"buy", "return", "try", "exchange"},
       {"woolen", "fashionable", "expensive", "loose"}, {"mall", "boutique", "department"}},
      {{"interview", "resume", "salary", "manager", "contract"}, {"apply", "sign", "prepare", "negotiate"},
       {"permanent", "demanding", "competitive", "flexible"}, {"office", "company", "headquarters"}},
      {{"fever", "prescription", "headache", "appointment", "medicine"}, {"examine", "prescribe", "cure", "rest"},
       {"terrible", "mild", "chronic", "sore"}, {"hospital", "clinic", "pharmacy"}},
      {{"exam", "lecture", "essay", "library", "professor"}, {"study", "review", "submit", "borrow"},
       {"difficult", "boring", "optional", "final"}, {"campus", "classroom", "dormitory"}},
      {{"match", "racket", "coach", "team", "stadium"}, {"play", "watch", "practice", "win"},
       {"exciting", "professional", "weekly", "tough"}, {"gym", "court", "field"}},
  };
  return t;
}

const std::vector<std::string> kNames = {"tom", "mary", "jack", "lucy", "bob", "susan", "mike", "linda"};
const std::vector<std::string> kDays = {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};
const std::vector<std::string> kRelatives = {"brother", "sister", "cousin", "roommate", "colleague"};
const std::vector<std::string> kNumbers = {"twenty", "thirty", "fifty", "eighty", "hundred"};

// Question / answer templates are paired by index.
const std::vector<std::string> kQuestions = {
    "Do you know where I can {V} a {A} {N} around here ?",
    "What do you think of the {N} at the {P} ?",
    "How much does the {A} {N} cost at the {P} ?",
    "When will the {N} be ready at the {P} ?",
    "Have you ever tried to {V} the {N} by yourself ?",
};
const std::vector<std::string> kAnswers = {
    "Yes , there is a {A} {N} near the {P} , and it is quite good .",
    "I think the {N} is {A} , but the {P} is too crowded for me .",
    "It costs about {num} dollars at the {P} , which is not bad at all .",
    "It should be ready by {day} , according to the people at the {P} .",
    "No , I have never tried to {V} a {N} before , it seems hard .",
};
// Request / promise templates, also paired.
const std::vector<std::string> kRequests = {
    "Could you {V} the {N} for me before {day} , please ?",
    "Please {V} the {A} {N} when you get to the {P} .",
    "Let's {V} the {N} together at the {P} this {day} .",
};
const std::vector<std::string> kPromises = {
    "Sure , I will {V} it as soon as I get to the {P} .",
    "No problem , I promise to bring the {N} on {day} morning .",
    "Okay , I'll meet you at the {P} and we can {V} it then .",
};
const std::vector<std::string> kStatements = {
    "By the way , my {rel} got a {A} {N} at the {P} last week .",
    "I heard the {P} has a {A} {N} this month , so it is busy .",
};
const std::vector<std::string> kFollowUps = {
    "Really ? What did your {rel} say about the {N} ?",
    "Is that so ? How long did it take to {V} the {N} ?",
};
const std::vector<std::string> kFollowAnswers = {
    "My {rel} said the {N} was {A} and worth every penny .",
    "It took almost a whole {day} to {V} the {N} properly .",
};
const std::vector<std::string> kGreetings = {"Hi , {name} .", "Hello , {name} .", "Good morning , {name} ."};
const std::vector<std::string> kThanks = {
    "Thank you so much for your help , {name} . See you on {day} !",
    "Great , thanks a lot . I really appreciate it , {name} .",
};
const std::vector<std::string> kGoodbyes = {
    "You are welcome . Take care and goodbye !",
    "My pleasure . Have a nice {day} , bye !",
};

constexpr int kInform = 1, kQuestion = 2, kDirective = 3, kCommissive = 4;

struct Utterance {
  std::string text;
  int act;
};

class Filler {
 public:
  Filler(const Topic& topic, std::string name, SeededRng& rng) : topic_(topic), name_(std::move(name)), rng_(rng) {}

  std::string fill(const std::string& tmpl) {
    std::string out;
    std::size_t i = 0;
    while (i < tmpl.size()) {
      if (tmpl[i] != '{') {
        out += tmpl[i++];
        continue;
      }
      const std::size_t close = tmpl.find('}', i);
      out += slot(tmpl.substr(i + 1, close - i - 1));
      i = close + 1;
    }
    return out;
  }

 private:
  const std::string& pick(const std::vector<std::string>& v) { return v[rng_.index(v.size())]; }

  std::string slot(const std::string& name) {
    if (name == "N") return pick(topic_.nouns);
    if (name == "V") return pick(topic_.verbs);
    if (name == "A") return pick(topic_.adjectives);
    if (name == "P") return pick(topic_.places);
    if (name == "name") return capitalized(name_);
    if (name == "day") return capitalized(pick(kDays));
    if (name == "rel") return pick(kRelatives);
    if (name == "num") return pick(kNumbers);
    throw PreconditionError("unknown template slot " + name);
  }

  static std::string capitalized(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
  }

  const Topic& topic_;
  std::string name_;
  SeededRng& rng_;
};

std::vector<Utterance> script(SeededRng& rng, const SyntheticCorpusOptions& o) {
  const Topic& topic = topics()[rng.index(topics().size())];
  Filler f(topic, kNames[rng.index(kNames.size())], rng);
  std::vector<Utterance> out;
  auto pick = [&](const std::vector<std::string>& v) { return rng.index(v.size()); };

  const std::size_t q = pick(kQuestions);
  out.push_back({f.fill(kGreetings[pick(kGreetings)]) + " " + f.fill(kQuestions[q]), kQuestion});
  out.push_back({f.fill(kAnswers[q]), kInform});

  const std::size_t exchanges = o.min_exchanges + rng.index(o.max_exchanges - o.min_exchanges + 1);
  for (std::size_t e = 0; e < exchanges; ++e) {
    switch (rng.index(3)) {
      case 0: {
        const std::size_t k = pick(kQuestions);
        out.push_back({f.fill(kQuestions[k]), kQuestion});
        out.push_back({f.fill(kAnswers[k]), kInform});
        break;
      }
      case 1: {
        const std::size_t k = pick(kRequests);
        out.push_back({f.fill(kRequests[k]), kDirective});
        out.push_back({f.fill(kPromises[k]), kCommissive});
        break;
      }
      default: {
        const std::size_t k = pick(kFollowUps);
        out.push_back({f.fill(kStatements[pick(kStatements)]), kInform});
        out.push_back({f.fill(kFollowUps[k]), kQuestion});
        out.push_back({f.fill(kFollowAnswers[k]), kInform});
        break;
      }
    }
  }
  out.push_back({f.fill(kThanks[pick(kThanks)]), kInform});
  out.push_back({f.fill(kGoodbyes[pick(kGoodbyes)]), kInform});
  return out;
}

void collect(std::set<std::string>& out, const std::string& text) {
  for (auto& t : tokenize(text)) {
    if (t.front() != '{') out.insert(t);
  }
}

}  // namespace

SyntheticCorpus synthetic_dailydialog(const SyntheticCorpusOptions& o) {
  if (o.min_exchanges > o.max_exchanges) throw ConfigError("min_exchanges exceeds max_exchanges");
  SyntheticCorpus c;
  for (std::size_t d = 0; d < o.dialogues; ++d) {
    SeededRng rng(mix_seed(o.seed, d));
    std::string text, acts;
    for (const auto& u : script(rng, o)) {
      text += u.text + " __eou__ ";
      acts += std::to_string(u.act) + " ";
    }
    text.pop_back();
    acts.pop_back();
    c.text += text + "\n";
    c.acts += acts + "\n";
  }
  return c;
}

std::vector<std::string> synthetic_lexicon() {
  std::set<std::string> words;
  for (const auto* group : {&kQuestions, &kAnswers, &kRequests, &kPromises, &kStatements, &kFollowUps,
                            &kFollowAnswers, &kGreetings, &kThanks, &kGoodbyes, &kNames, &kDays, &kRelatives,
                            &kNumbers}) {
    for (const auto& s : *group) collect(words, s);
  }
  for (const auto& t : topics()) {
    for (const auto* bank : {&t.nouns, &t.verbs, &t.adjectives, &t.places}) {
      for (const auto& w : *bank) words.insert(w);
    }
  }
  return {words.begin(), words.end()};
}

std::string synthetic_embeddings(const std::vector<std::string>& words, std::size_t dim, std::uint64_t seed) {
  std::map<std::string, std::size_t> topic_of;
  for (std::size_t k = 0; k < topics().size(); ++k) {
    const Topic& t = topics()[k];
    for (const auto* bank : {&t.nouns, &t.verbs, &t.adjectives, &t.places}) {
      for (const auto& w : *bank) topic_of.emplace(w, k);
    }
  }
  std::vector<std::vector<double>> centroids;
  SeededRng crng(mix_seed(seed, 0xce));
  for (std::size_t k = 0; k < topics().size(); ++k) {
    std::vector<double> c(dim);
    for (double& x : c) x = crng.uniform(-1.0, 1.0);
    centroids.push_back(std::move(c));
  }
  std::ostringstream out;
  char buf[32];
  for (const auto& w : words) {
    SeededRng rng(mix_seed(seed, hash_string(w)));
    auto it = topic_of.find(w);
    out << w;
    for (std::size_t j = 0; j < dim; ++j) {
      double v = rng.uniform(-1.0, 1.0);
      if (it != topic_of.end()) v = 0.7 * centroids[it->second][j] + 0.3 * v;
      std::snprintf(buf, sizeof buf, " %.6f", 0.5 * v);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace dicoh
