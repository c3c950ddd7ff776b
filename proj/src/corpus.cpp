#include "pivotex/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pivotex {

namespace {

// days since 1970-01-01 from a civil date (Gregorian, proleptic)
int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t yy = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(yy + (m <= 2));
}

bool is_leap(int y) { return y % 4 == 0 && (y % 100 != 0 || y % 400 == 0); }

unsigned days_in_month(int y, unsigned m) {
  static const unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return kDays[m - 1];
}

bool all_digits(std::string_view s) {
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return !s.empty();
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

Date parse_date(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-' ||
      !all_digits(iso.substr(0, 4)) || !all_digits(iso.substr(5, 2)) ||
      !all_digits(iso.substr(8, 2))) {
    throw Error("invalid date '" + std::string(iso) + "': expected YYYY-MM-DD");
  }
  int y = std::stoi(std::string(iso.substr(0, 4)));
  unsigned m = static_cast<unsigned>(std::stoi(std::string(iso.substr(5, 2))));
  unsigned d = static_cast<unsigned>(std::stoi(std::string(iso.substr(8, 2))));
  if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m))
    throw Error("invalid date '" + std::string(iso) + "': no such calendar day");
  return Date{static_cast<int32_t>(days_from_civil(y, m, d))};
}

std::string format_date(Date date) {
  int y;
  unsigned m, d;
  civil_from_days(date.days, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", y, m, d);
  return buf;
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char c : text) {
    if (c >= 0x80) {
      cur.push_back(static_cast<char>(c));
    } else if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::string join_tokens(const Tokens& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

const Sentence& CorpusSide::sentence(int64_t id) const {
  if (id < 0 || static_cast<size_t>(id) >= sentences.size())
    throw Error("unknown sentence id " + std::to_string(id));
  return sentences[static_cast<size_t>(id)];
}

StopWordList::StopWordList(const std::vector<std::string>& words) {
  for (const auto& w : words) words_.insert(to_lower_ascii(w));
}

StopWordList StopWordList::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stop-word list: " + path);
  StopWordList list;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    list.words_.insert(to_lower_ascii(line));
  }
  return list;
}

bool StopWordList::contains(std::string_view token) const {
  if (words_.empty()) return false;
  return words_.count(to_lower_ascii(token)) > 0;
}

CorpusSide ingest_corpus(const std::string& path, const std::string& lang) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);
  return ingest_corpus_stream(in, lang, path);
}

CorpusSide ingest_corpus_stream(std::istream& in, const std::string& lang,
                                const std::string& origin) {
  CorpusSide side;
  side.lang = lang;
  std::string line;
  int64_t line_no = 0;
  int64_t next_sentence_id = 0;
  auto fail = [&](const std::string& what) {
    throw Error(origin + ": line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object()) fail("malformed record: not a JSON object");
    if (!rec.contains("date") || !rec["date"].is_string())
      fail("malformed record: missing string field 'date'");
    if (!rec.contains("sentences") || !rec["sentences"].is_array())
      fail("malformed record: missing array field 'sentences'");
    if (rec.contains("lang") && rec["lang"].get<std::string>() != lang)
      fail("record language '" + rec["lang"].get<std::string>() +
           "' does not match corpus side '" + lang + "'");

    Document doc;
    doc.lang = lang;
    doc.id = rec.contains("id") ? rec["id"].get<std::string>()
                                : "d" + std::to_string(side.documents.size());
    try {
      doc.date = parse_date(rec["date"].get<std::string>());
    } catch (const Error& e) {
      fail(std::string("record '") + doc.id + "': " + e.what());
    }
    for (const auto& s : rec["sentences"]) {
      if (!s.is_string()) fail("malformed record: sentence is not a string");
      Sentence sent;
      sent.id = next_sentence_id++;
      sent.doc_id = doc.id;
      sent.lang = lang;
      sent.date = doc.date;
      sent.text = s.get<std::string>();
      sent.tokens = tokenize(sent.text);
      doc.sentence_ids.push_back(sent.id);
      side.sentences.push_back(std::move(sent));
    }
    if (doc.sentence_ids.empty()) fail("record '" + doc.id + "' has no sentences");
    side.documents.push_back(std::move(doc));
  }
  return side;
}

std::string canonical_jsonl(const CorpusSide& side) {
  std::ostringstream out;
  for (const auto& doc : side.documents) {
    nlohmann::ordered_json rec;
    rec["id"] = doc.id;
    rec["date"] = format_date(doc.date);
    rec["lang"] = doc.lang;
    auto& arr = rec["sentences"] = nlohmann::ordered_json::array();
    for (int64_t sid : doc.sentence_ids) arr.push_back(side.sentence(sid).text);
    out << rec.dump() << '\n';
  }
  return out.str();
}

Tokens remove_stop_words(const Tokens& tokens, const StopWordList& stops) {
  Tokens out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (!stops.contains(t)) out.push_back(t);
  return out;
}

}  // namespace pivotex
