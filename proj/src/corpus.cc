#include "mice/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mice/rng.h"

namespace mice {
namespace {

std::vector<std::string> SplitOn(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> SplitWhitespace(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

// Groups sentence indices by expression, in order of first appearance.
std::vector<std::pair<std::string, std::vector<std::size_t>>> GroupByExpression(
    std::span<const AnnotatedSentence> sentences) {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto [it, inserted] = slot.try_emplace(sentences[i].expression, groups.size());
    if (inserted) groups.push_back({sentences[i].expression, {}});
    groups[it->second].second.push_back(i);
  }
  return groups;
}

void CheckFraction(double f, const char* what) {
  if (!(f > 0.0 && f < 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in (0, 1)");
  }
}

}  // namespace

const char* AnnotatorLabelName(AnnotatorLabel label) {
  switch (label) {
    case AnnotatorLabel::kYes: return "YES";
    case AnnotatorLabel::kNo: return "NO";
    case AnnotatorLabel::kDontKnow: return "DONT_KNOW";
    case AnnotatorLabel::kVague: return "VAGUE";
  }
  return "?";
}

AnnotatorLabel ParseAnnotatorLabel(const std::string& text) {
  std::string upper = text;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper == "YES") return AnnotatorLabel::kYes;
  if (upper == "NO") return AnnotatorLabel::kNo;
  if (upper == "DONT_KNOW") return AnnotatorLabel::kDontKnow;
  if (upper == "VAGUE") return AnnotatorLabel::kVague;
  throw std::invalid_argument("unknown annotator label '" + text + "'");
}

char TokenLabelCode(TokenLabel label) {
  switch (label) {
    case TokenLabel::kIdiomatic: return 'I';
    case TokenLabel::kLiteralExpr: return 'L';
    case TokenLabel::kOutside: return 'O';
  }
  return '?';
}

void DeriveSentenceLabel(AnnotatedSentence& sentence) {
  const bool any = std::any_of(
      sentence.token_labels.begin(), sentence.token_labels.end(),
      [](TokenLabel l) { return l == TokenLabel::kIdiomatic; });
  sentence.sentence_label = any ? SentenceLabel::kIdiomatic : SentenceLabel::kLiteral;
}

void Validate(const AnnotatedSentence& sentence) {
  if (sentence.token_labels.size() != sentence.tokens.size()) {
    throw std::invalid_argument("sentence " + sentence.id +
                                ": label count differs from token count");
  }
  if (sentence.expression.empty()) {
    throw std::invalid_argument("sentence " + sentence.id + ": empty expression");
  }
  AnnotatedSentence copy = sentence;
  DeriveSentenceLabel(copy);
  if (copy.sentence_label != sentence.sentence_label) {
    throw std::invalid_argument("sentence " + sentence.id +
                                ": sentence label disagrees with token labels");
  }
}

CorpusStats ComputeStats(std::span<const AnnotatedSentence> sentences) {
  CorpusStats stats;
  std::unordered_set<std::string> expressions;
  for (const auto& s : sentences) {
    ++stats.sentences;
    stats.tokens += s.tokens.size();
    if (s.idiomatic()) {
      ++stats.idiomatic_sentences;
    } else {
      ++stats.literal_sentences;
    }
    for (TokenLabel l : s.token_labels) {
      if (l == TokenLabel::kIdiomatic) {
        ++stats.idiomatic_tokens;
      } else {
        ++stats.literal_tokens;
      }
    }
    expressions.insert(s.expression);
  }
  stats.expressions = expressions.size();
  return stats;
}

std::ostream& operator<<(std::ostream& os, const CorpusStats& stats) {
  os << "sentences\t" << stats.sentences << '\n'
     << "tokens\t" << stats.tokens << '\n'
     << "idiomatic_sentences\t" << stats.idiomatic_sentences << '\n'
     << "literal_sentences\t" << stats.literal_sentences << '\n'
     << "idiomatic_tokens\t" << stats.idiomatic_tokens << '\n'
     << "literal_tokens\t" << stats.literal_tokens << '\n'
     << "expressions\t" << stats.expressions << '\n';
  return os;
}

Corpus ParseSloie(std::istream& in, const std::string& language) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto cols = SplitOn(line, '\t');
    if (cols.size() != 6) {
      throw FormatError("expected 6 tab-separated columns, found " +
                            std::to_string(cols.size()),
                        line_no);
    }
    AnnotatedSentence s;
    s.id = cols[0];
    s.language = language;
    s.expression = cols[1];
    if (s.id.empty()) throw FormatError("empty sentence id", line_no);
    if (s.expression.empty()) throw FormatError("empty expression", line_no);
    if (!seen.insert(s.id).second) {
      throw FormatError("duplicate sentence id '" + s.id + "'", line_no);
    }
    try {
      s.annotator_a = ParseAnnotatorLabel(cols[2]);
      s.annotator_b = ParseAnnotatorLabel(cols[3]);
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what(), line_no);
    }
    s.tokens = SplitWhitespace(cols[4]);
    const auto mask = SplitWhitespace(cols[5]);
    if (s.tokens.empty()) throw FormatError("sentence has no tokens", line_no);
    if (mask.size() != s.tokens.size()) {
      throw FormatError("label mask has " + std::to_string(mask.size()) +
                            " entries for " + std::to_string(s.tokens.size()) +
                            " tokens",
                        line_no);
    }
    s.token_labels.reserve(mask.size());
    for (const auto& m : mask) {
      if (m == "I") {
        s.token_labels.push_back(TokenLabel::kIdiomatic);
      } else if (m == "L") {
        s.token_labels.push_back(TokenLabel::kLiteralExpr);
      } else if (m == "O") {
        s.token_labels.push_back(TokenLabel::kOutside);
      } else {
        throw FormatError("bad mask entry '" + m + "'", line_no);
      }
    }
    DeriveSentenceLabel(s);
    corpus.push_back(std::move(s));
  }
  if (in.bad()) throw std::runtime_error("read error");
  return corpus;
}

Corpus LoadSloie(const std::filesystem::path& path, const std::string& language) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return ParseSloie(in, language);
  } catch (const FormatError& e) {
    throw e.WithContext(path.string());
  }
}

void WriteSloie(std::span<const AnnotatedSentence> sentences, std::ostream& out) {
  for (const auto& s : sentences) {
    Validate(s);
    out << s.id << '\t' << s.expression << '\t'
        << AnnotatorLabelName(s.annotator_a) << '\t'
        << AnnotatorLabelName(s.annotator_b) << '\t';
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (i) out << ' ';
      out << s.tokens[i];
    }
    out << '\t';
    for (std::size_t i = 0; i < s.token_labels.size(); ++i) {
      if (i) out << ' ';
      out << TokenLabelCode(s.token_labels[i]);
    }
    out << '\n';
  }
}

void WriteSloie(std::span<const AnnotatedSentence> sentences,
                const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  WriteSloie(sentences, out);
}

Corpus FilterAgreement(std::span<const AnnotatedSentence> sentences) {
  Corpus kept;
  for (const auto& s : sentences) {
    if (s.annotator_a == s.annotator_b &&
        (s.annotator_a == AnnotatorLabel::kYes ||
         s.annotator_a == AnnotatorLabel::kNo)) {
      kept.push_back(s);
    }
  }
  return kept;
}

double InterAnnotatorAgreement(std::span<const AnnotatedSentence> sentences) {
  if (sentences.empty()) {
    throw std::invalid_argument("agreement of an empty corpus is undefined");
  }
  const auto agreeing = std::count_if(
      sentences.begin(), sentences.end(),
      [](const AnnotatedSentence& s) { return s.annotator_a == s.annotator_b; });
  return static_cast<double>(agreeing) / static_cast<double>(sentences.size());
}

const char* SplitModeName(SplitMode mode) {
  switch (mode) {
    case SplitMode::kRandom: return "random";
    case SplitMode::kExpressionDisjoint: return "expression-disjoint";
    case SplitMode::kLeaveOneExpressionOut: return "leave-one-expression-out";
    case SplitMode::kStratified: return "stratified";
  }
  return "?";
}

SplitMode ParseSplitMode(const std::string& name) {
  if (name == "random") return SplitMode::kRandom;
  if (name == "expression-disjoint" || name == "disjoint")
    return SplitMode::kExpressionDisjoint;
  if (name == "leave-one-expression-out" || name == "loeo")
    return SplitMode::kLeaveOneExpressionOut;
  if (name == "stratified") return SplitMode::kStratified;
  throw std::invalid_argument("unknown split mode '" + name + "'");
}

void CheckPartition(const DataSplit& split, std::size_t corpus_size) {
  std::vector<char> seen(corpus_size, 0);
  for (const auto* part : {&split.train, &split.test, &split.dev}) {
    for (std::size_t i : *part) {
      if (i >= corpus_size) throw std::logic_error("split index out of range");
      if (seen[i]) throw std::logic_error("split sets overlap");
      seen[i] = 1;
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::logic_error("split does not cover the corpus");
  }
}

Corpus Select(std::span<const AnnotatedSentence> sentences,
              std::span<const std::size_t> indices) {
  Corpus out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(sentences[i]);
  return out;
}

DataSplit SplitRandom(std::span<const AnnotatedSentence> sentences,
                      std::array<double, 3> ratios, std::uint64_t seed) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw std::invalid_argument("split ratios must be >= 0");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1");
  }
  const std::size_t n = sentences.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(std::span(order));

  std::size_t n_train = static_cast<std::size_t>(std::llround(n * ratios[0]));
  std::size_t n_test = static_cast<std::size_t>(std::llround(n * ratios[1]));
  n_train = std::min(n_train, n);
  n_test = std::min(n_test, n - n_train);

  DataSplit split;
  split.mode = SplitMode::kRandom;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.test.assign(order.begin() + n_train, order.begin() + n_train + n_test);
  split.dev.assign(order.begin() + n_train + n_test, order.end());
  return split;
}

DataSplit SplitExpressionDisjoint(std::span<const AnnotatedSentence> sentences,
                                  double test_fraction, std::uint64_t seed) {
  CheckFraction(test_fraction, "test fraction");
  auto groups = GroupByExpression(sentences);
  if (groups.size() < 2) {
    throw std::invalid_argument(
        "expression-disjoint split needs at least 2 distinct expressions");
  }
  Rng rng(seed);
  rng.Shuffle(std::span(groups));
  std::stable_sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
    return a.second.size() > b.second.size();
  });

  const double target = test_fraction * static_cast<double>(sentences.size());
  std::vector<char> in_test(groups.size(), 0);
  double test_count = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double size = static_cast<double>(groups[g].second.size());
    if (std::abs(test_count + size - target) < std::abs(test_count - target)) {
      in_test[g] = 1;
      test_count += size;
    }
  }
  // Both sides must be non-empty; groups are sorted by size so the last
  // group on a side is its smallest.
  auto count_side = [&](char side) {
    return std::count(in_test.begin(), in_test.end(), side);
  };
  const std::size_t last = groups.size() - 1;
  if (count_side(1) == 0) {
    in_test[last] = 1;
  } else if (count_side(0) == 0) {
    in_test[last] = 0;
  }

  DataSplit split;
  split.mode = SplitMode::kExpressionDisjoint;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& side = in_test[g] ? split.test : split.train;
    side.insert(side.end(), groups[g].second.begin(), groups[g].second.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());

  std::unordered_set<std::string> train_expressions;
  for (std::size_t i : split.train) train_expressions.insert(sentences[i].expression);
  for (std::size_t i : split.test) {
    if (train_expressions.count(sentences[i].expression)) {
      throw std::logic_error("expression '" + sentences[i].expression +
                             "' appears on both sides of a disjoint split");
    }
  }
  return split;
}

DataSplit SplitLeaveOneExpressionOut(std::span<const AnnotatedSentence> sentences,
                                     const std::string& expression) {
  DataSplit split;
  split.mode = SplitMode::kLeaveOneExpressionOut;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    (sentences[i].expression == expression ? split.test : split.train).push_back(i);
  }
  if (split.test.empty()) {
    throw std::invalid_argument("expression '" + expression + "' not in corpus");
  }
  return split;
}

DataSplit SplitStratified(std::span<const AnnotatedSentence> sentences,
                          double test_fraction, std::uint64_t seed) {
  CheckFraction(test_fraction, "test fraction");
  std::map<std::pair<std::string, bool>, std::vector<std::size_t>> strata;
  std::vector<std::pair<std::string, bool>> order;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    std::pair key{sentences[i].expression, sentences[i].idiomatic()};
    auto [it, inserted] = strata.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(i);
  }
  Rng rng(seed);
  DataSplit split;
  split.mode = SplitMode::kStratified;
  for (const auto& key : order) {
    auto& members = strata[key];
    rng.Shuffle(std::span(members));
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(members.size())));
    split.test.insert(split.test.end(), members.begin(), members.begin() + n_test);
    split.train.insert(split.train.end(), members.begin() + n_test, members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Corpus Subsample(std::span<const AnnotatedSentence> sentences, double fraction,
                 std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("subsample fraction must lie in (0, 1]");
  }
  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.Shuffle(std::span(order));
  const auto n = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(sentences.size())));
  order.resize(n);
  std::sort(order.begin(), order.end());
  return Select(sentences, order);
}

Corpus BalancePerExpression(std::span<const AnnotatedSentence> sentences,
                            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> kept;
  for (auto& [expression, members] : GroupByExpression(sentences)) {
    std::vector<std::size_t> idiomatic, literal;
    for (std::size_t i : members) {
      (sentences[i].idiomatic() ? idiomatic : literal).push_back(i);
    }
    const std::size_t k = std::min(idiomatic.size(), literal.size());
    if (k == 0) continue;
    rng.Shuffle(std::span(idiomatic));
    rng.Shuffle(std::span(literal));
    kept.insert(kept.end(), idiomatic.begin(), idiomatic.begin() + k);
    kept.insert(kept.end(), literal.begin(), literal.begin() + k);
  }
  std::sort(kept.begin(), kept.end());
  return Select(sentences, kept);
}

Corpus SizeMatchedSubset(std::span<const AnnotatedSentence> sentences,
                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> kept;
  for (auto& [expression, members] : GroupByExpression(sentences)) {
    const auto n_idiomatic = static_cast<std::size_t>(
        std::count_if(members.begin(), members.end(),
                      [&](std::size_t i) { return sentences[i].idiomatic(); }));
    const std::size_t k = std::min(n_idiomatic, members.size() - n_idiomatic);
    if (k == 0) continue;
    rng.Shuffle(std::span(members));
    kept.insert(kept.end(), members.begin(), members.begin() + 2 * k);
  }
  std::sort(kept.begin(), kept.end());
  return Select(sentences, kept);
}

Corpus BalancedIdiomSet(std::span<const AnnotatedSentence> sentences,
                        std::uint64_t seed) {
  std::vector<std::size_t> idiomatic, literal;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    (sentences[i].idiomatic() ? idiomatic : literal).push_back(i);
  }
  Rng rng(seed);
  rng.Shuffle(std::span(literal));
  literal.resize(std::min(literal.size(), idiomatic.size()));
  idiomatic.insert(idiomatic.end(), literal.begin(), literal.end());
  std::sort(idiomatic.begin(), idiomatic.end());
  return Select(sentences, idiomatic);
}

std::vector<std::string> DistinctExpressions(
    std::span<const AnnotatedSentence> sentences) {
  std::vector<std::string> out;
  for (auto& group : GroupByExpression(sentences)) out.push_back(group.first);
  return out;
}

void WriteSplit(const DataSplit& split, std::span<const AnnotatedSentence> sentences,
                const std::filesystem::path& path) {
  CheckPartition(split, sentences.size());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# mode=" << SplitModeName(split.mode) << '\n';
  const std::pair<const char*, const std::vector<std::size_t>*> sections[] = {
      {"[train]", &split.train}, {"[test]", &split.test}, {"[dev]", &split.dev}};
  for (const auto& [header, ids] : sections) {
    out << header << '\n';
    for (std::size_t i : *ids) out << sentences[i].id << '\n';
  }
}

DataSplit ReadSplit(const std::filesystem::path& path,
                    std::span<const AnnotatedSentence> sentences) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < sentences.size(); ++i) index[sentences[i].id] = i;

  DataSplit split;
  std::vector<std::size_t>* section = nullptr;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# mode=", 0) == 0) {
      split.mode = ParseSplitMode(line.substr(7));
    } else if (line[0] == '#') {
      continue;
    } else if (line == "[train]") {
      section = &split.train;
    } else if (line == "[test]") {
      section = &split.test;
    } else if (line == "[dev]") {
      section = &split.dev;
    } else {
      if (!section) throw FormatError("id before any section header", line_no);
      auto it = index.find(line);
      if (it == index.end()) {
        throw FormatError("unknown sentence id '" + line + "'", line_no);
      }
      section->push_back(it->second);
    }
  }
  try {
    CheckPartition(split, sentences.size());
  } catch (const std::logic_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return split;
}

Corpus MakeSyntheticCorpus(const SyntheticCorpusOptions& options) {
  if (options.expressions == 0 || options.min_length < 3 ||
      options.max_length < options.min_length || options.vocabulary == 0) {
    throw std::invalid_argument("invalid synthetic corpus options");
  }
  Rng rng(DeriveSeed(options.seed, "synthetic-corpus"));

  struct Expression {
    std::vector<std::string> words;
    double idiomatic_rate;
    double weight;
  };
  std::vector<Expression> expressions;
  double total_weight = 0.0;
  for (std::size_t e = 0; e < options.expressions; ++e) {
    Expression ex;
    const std::size_t n_words = 2 + rng.Below(2);
    for (std::size_t w = 0; w < n_words; ++w) {
      ex.words.push_back("x" + std::to_string(e) + "_" + std::to_string(w));
    }
    ex.idiomatic_rate = rng.Uniform(0.45, 0.95);
    // Zipf-like skew in expression frequency.
    ex.weight = 1.0 / (1.0 + 0.3 * static_cast<double>(e));
    total_weight += ex.weight;
    expressions.push_back(std::move(ex));
  }

  Corpus corpus;
  corpus.reserve(options.sentences);
  for (std::size_t i = 0; i < options.sentences; ++i) {
    // First pass guarantees every expression occurs at least once.
    std::size_t e = i;
    if (i >= expressions.size()) {
      double pick = rng.Uniform() * total_weight;
      for (e = 0; e + 1 < expressions.size(); ++e) {
        pick -= expressions[e].weight;
        if (pick < 0.0) break;
      }
    }
    const Expression& ex = expressions[e];
    const bool idiomatic = rng.Bernoulli(ex.idiomatic_rate);
    const std::size_t span = options.max_length - options.min_length + 1;
    const std::size_t length =
        std::max(options.min_length + rng.Below(span), ex.words.size() + 1);
    const std::size_t start = rng.Below(length - ex.words.size() + 1);

    AnnotatedSentence s;
    s.id = "syn" + std::to_string(i);
    s.expression = ex.words[0];
    for (std::size_t w = 1; w < ex.words.size(); ++w) s.expression += " " + ex.words[w];
    for (std::size_t t = 0; t < length; ++t) {
      if (t >= start && t < start + ex.words.size()) {
        s.tokens.push_back(ex.words[t - start]);
        s.token_labels.push_back(idiomatic ? TokenLabel::kIdiomatic
                                           : TokenLabel::kLiteralExpr);
      } else {
        s.tokens.push_back("w" + std::to_string(rng.Below(options.vocabulary)));
        s.token_labels.push_back(TokenLabel::kOutside);
      }
    }
    s.annotator_a = s.annotator_b = idiomatic ? AnnotatorLabel::kYes : AnnotatorLabel::kNo;
    DeriveSentenceLabel(s);
    corpus.push_back(std::move(s));
  }
  return corpus;
}

}  // namespace mice
