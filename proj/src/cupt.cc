#include "mice/cupt.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

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

int ParsePositiveInt(const std::string& s, std::size_t line_no, const char* what) {
  if (s.empty() || !std::all_of(s.begin(), s.end(),
                                   [](unsigned char c) { return std::isdigit(c) != 0; })) {
    throw FormatError(std::string("bad ") + what + " '" + s + "'", line_no);
  }
  return std::stoi(s);
}

std::string SentenceIdFromComments(const std::vector<std::string>& comments,
                                   std::size_t ordinal) {
  for (const auto& c : comments) {
    for (const char* key : {"# source_sent_id =", "# sent_id ="}) {
      if (c.rfind(key, 0) == 0) {
        std::istringstream fields(c.substr(std::string(key).size()));
        std::string field, last;
        while (fields >> field) last = field;
        if (!last.empty()) return last;
      }
    }
  }
  return "s" + std::to_string(ordinal);
}

class SentenceBuilder {
 public:
  explicit SentenceBuilder(const std::set<std::string>& keep) : keep_(keep) {}

  bool empty() const { return current_.rows.empty() && current_.comments.empty(); }

  void AddComment(const std::string& line) { current_.comments.push_back(line); }

  void AddRow(const std::vector<std::string>& cols, std::size_t line_no) {
    const std::string& id = cols[0];
    if (id.find('-') != std::string::npos || id.find('.') != std::string::npos) {
      return;
    }
    CuptRow row;
    row.index = ParsePositiveInt(id, line_no, "token index");
    if (!current_.rows.empty() && row.index <= current_.rows.back().index) {
      throw FormatError("token indices must be strictly increasing", line_no);
    }
    std::copy(cols.begin(), cols.begin() + 10, row.conllu.begin());
    row.form = cols[1];
    row.mwe = cols[10];
    if (row.mwe != "*" && row.mwe != "_") {
      for (const auto& code : SplitOn(row.mwe, ';')) {
        const auto colon = code.find(':');
        const int span_id =
            ParsePositiveInt(code.substr(0, colon), line_no, "MWE id");
        auto it = spans_.find(span_id);
        if (colon != std::string::npos) {
          if (it != spans_.end()) {
            throw FormatError("MWE " + std::to_string(span_id) +
                                  " given a category twice",
                              line_no);
          }
          const std::string category = code.substr(colon + 1);
          if (category.empty()) throw FormatError("empty MWE category", line_no);
          it = spans_.emplace(span_id, MweSpan{span_id, category, {}}).first;
        } else if (it == spans_.end()) {
          throw FormatError("MWE " + std::to_string(span_id) +
                                " continued before its category was given",
                            line_no);
        }
        it->second.tokens.push_back(row.index);
      }
    }
    current_.rows.push_back(std::move(row));
  }

  CuptSentence Finish(std::size_t ordinal) {
    CuptSentence done = std::move(current_);
    done.sentence_id = SentenceIdFromComments(done.comments, ordinal);
    for (auto& [id, span] : spans_) {
      if (keep_.empty() || keep_.count(span.category)) {
        done.spans.push_back(std::move(span));
      }
    }
    current_ = CuptSentence{};
    spans_.clear();
    return done;
  }

 private:
  const std::set<std::string>& keep_;
  CuptSentence current_;
  std::map<int, MweSpan> spans_;
};

}  // namespace

std::vector<CuptSentence> ParseCupt(std::istream& in,
                                    const std::set<std::string>& keep_categories) {
  std::vector<CuptSentence> sentences;
  SentenceBuilder builder(keep_categories);
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!builder.empty()) sentences.push_back(builder.Finish(sentences.size() + 1));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
    } else if (line[0] == '#') {
      builder.AddComment(line);
    } else {
      const auto cols = SplitOn(line, '\t');
      if (cols.size() != 11) {
        throw FormatError("expected 11 tab-separated columns, found " +
                              std::to_string(cols.size()),
                          line_no);
      }
      builder.AddRow(cols, line_no);
    }
  }
  flush();
  // A file-level "# global.columns" header is a comment without rows.
  std::erase_if(sentences, [](const CuptSentence& s) { return s.rows.empty(); });
  return sentences;
}

std::vector<CuptSentence> LoadCupt(const std::filesystem::path& path,
                                   const std::set<std::string>& keep_categories) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return ParseCupt(in, keep_categories);
  } catch (const FormatError& e) {
    throw e.WithContext(path.string());
  }
}

void WriteCupt(const std::vector<CuptSentence>& sentences, std::ostream& out) {
  for (const auto& s : sentences) {
    for (const auto& c : s.comments) out << c << '\n';
    for (const auto& row : s.rows) {
      for (const auto& col : row.conllu) out << col << '\t';
      std::string codes;
      for (const auto& span : s.spans) {
        if (std::find(span.tokens.begin(), span.tokens.end(), row.index) ==
            span.tokens.end()) {
          continue;
        }
        if (!codes.empty()) codes += ';';
        codes += std::to_string(span.id);
        if (span.tokens.front() == row.index) codes += ':' + span.category;
      }
      out << (codes.empty() ? "*" : codes) << '\n';
    }
    out << '\n';
  }
}

AnnotatedSentence CuptToAnnotated(const CuptSentence& sentence,
                                  const std::string& language) {
  AnnotatedSentence out;
  out.id = sentence.sentence_id;
  out.language = language;
  std::map<int, std::size_t> position;
  for (std::size_t i = 0; i < sentence.rows.size(); ++i) {
    position[sentence.rows[i].index] = i;
    out.tokens.push_back(sentence.rows[i].form);
  }
  out.token_labels.assign(out.tokens.size(), TokenLabel::kOutside);
  for (const auto& span : sentence.spans) {
    for (int t : span.tokens) out.token_labels[position.at(t)] = TokenLabel::kIdiomatic;
  }
  if (sentence.spans.empty()) {
    out.expression = "<none>";
  } else {
    for (int t : sentence.spans.front().tokens) {
      const CuptRow& row = sentence.rows[position.at(t)];
      const std::string& lemma = row.conllu[2] == "_" ? row.form : row.conllu[2];
      if (!out.expression.empty()) out.expression += ' ';
      out.expression += lemma;
    }
  }
  const bool idiomatic = !sentence.spans.empty();
  out.annotator_a = out.annotator_b = idiomatic ? AnnotatorLabel::kYes : AnnotatorLabel::kNo;
  DeriveSentenceLabel(out);
  return out;
}

}  // namespace mice
