#ifndef MICE_CUPT_H_
#define MICE_CUPT_H_

#include <array>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "mice/corpus.h"

namespace mice {

// One word line of a .cupt file. Multiword-token ranges ("3-4") and empty
// nodes ("5.1") are not kept.
struct CuptRow {
  int index = 0;
  std::string form;
  std::string mwe;                       // raw 11th column as read
  std::array<std::string, 10> conllu;    // the ten CoNLL-U columns verbatim

  bool operator==(const CuptRow&) const = default;
};

struct MweSpan {
  int id = 0;
  std::string category;
  std::vector<int> tokens;  // cupt token indices, ascending

  bool operator==(const MweSpan&) const = default;
};

struct CuptSentence {
  std::string sentence_id;
  std::vector<std::string> comments;  // full comment lines, '#' included
  std::vector<CuptRow> rows;
  std::vector<MweSpan> spans;         // ordered by span id

  bool operator==(const CuptSentence&) const = default;
};

// Parses PARSEME .cupt text. Spans whose category is not in keep_categories
// are discarded; an empty set keeps every category.
std::vector<CuptSentence> ParseCupt(std::istream& in,
                                    const std::set<std::string>& keep_categories);
std::vector<CuptSentence> LoadCupt(const std::filesystem::path& path,
                                   const std::set<std::string>& keep_categories);

// Writes sentences back as .cupt. The MWE column is regenerated from `spans`,
// so spans removed by filtering come out as '*'.
void WriteCupt(const std::vector<CuptSentence>& sentences, std::ostream& out);

// Tokens covered by any span become IDIOMATIC (overlapping spans are unioned),
// everything else OUTSIDE. The expression is the lemma sequence of the first
// span, or "<none>" for sentences without spans. Annotator fields are set to
// an agreeing YES/YES or NO/NO pair.
AnnotatedSentence CuptToAnnotated(const CuptSentence& sentence,
                                  const std::string& language);

}  // namespace mice

#endif  // MICE_CUPT_H_
