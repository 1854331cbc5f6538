#pragma once

// Reading and writing control specification files.
//
// CSV layout (two header rows, mirroring the spreadsheet):
//
//   Control,Cost,Mandatory,Requires,Sensors,,,UAV,,
//   ,,,,C,I,A,C,I,A
//   AC-7,10000,false,,None,Medium,Low,,,
//   AU-12,30000,false,AU-1+AU-2+AU-3,None,Low|Medium,None,,,
//
// Requires holds `;`-separated products whose atoms are joined by `+`.
// Uncertain cells list ratings separated by `|`; an empty cell is None.
// An optional `Name` column may follow `Control`.

#include <openssl/evp.h>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <istream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ctrlgame/catalogue.hpp"
#include "ctrlgame/error.hpp"

namespace ctrlgame {

enum class SpecFormat { Csv, Json };

namespace csv {

struct Record {
  std::size_t line = 0;  // physical line the record starts on
  std::vector<std::string> fields;
};

/// RFC 4180 records. Accepts LF or CRLF; quoted fields may span lines.
inline std::vector<Record> read_records(std::string_view text) {
  std::vector<Record> out;
  std::size_t line = 1;
  std::size_t i = 0;
  if (text.starts_with("\xEF\xBB\xBF")) i = 3;
  while (i < text.size()) {
    Record rec;
    rec.line = line;
    std::string field;
    bool in_quotes = false, quoted = false, end_of_record = false;
    while (i < text.size() && !end_of_record) {
      char c = text[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          in_quotes = false;
        } else {
          if (c == '\n') ++line;
          field += c;
        }
        ++i;
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty() || quoted) throw ParseError(line, "", "unexpected quote inside unquoted field");
          in_quotes = quoted = true;
          ++i;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          quoted = false;
          ++i;
          break;
        case '\r':
          ++i;
          break;
        case '\n':
          ++line;
          ++i;
          end_of_record = true;
          break;
        default:
          if (quoted) throw ParseError(line, "", "characters after closing quote");
          field += c;
          ++i;
      }
    }
    if (in_quotes) throw ParseError(rec.line, "", "unterminated quoted field");
    rec.fields.push_back(std::move(field));
    bool blank = rec.fields.size() == 1 && rec.fields[0].empty();
    if (!blank) out.push_back(std::move(rec));
  }
  return out;
}

inline std::string quote(std::string_view field) {
  bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
               (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto lower = [](char c) { return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c; };
    if (lower(a[i]) != lower(b[i])) return false;
  }
  return true;
}

}  // namespace csv

namespace detail {

inline ControlId parse_id(std::string_view raw, std::size_t line, const std::string& field) {
  auto text = csv::trim(raw);
  if (auto why = ControlId::invalid_reason(text); !why.empty())
    throw ParseError(line, field, "invalid control id '" + std::string(text) + "': " + why);
  return ControlId(std::string(text));
}

inline std::vector<Combination> parse_dependencies(std::string_view text, std::size_t line,
                                                   const std::string& field) {
  std::vector<Combination> out;
  text = csv::trim(text);
  if (text.empty()) return out;
  for (auto product : csv::split(text, ';')) {
    Combination consequent;
    for (auto atom : csv::split(product, '+')) consequent.insert(parse_id(atom, line, field));
    out.push_back(std::move(consequent));
  }
  return out;
}

inline EffectivenessCell parse_cell(std::string_view text, std::size_t line, const std::string& field) {
  text = csv::trim(text);
  if (text.empty()) return EffectivenessCell{};
  std::vector<Rating> options;
  for (auto part : csv::split(text, '|')) {
    auto r = parse_rating(csv::trim(part));
    if (!r) throw ParseError(ErrorCode::UnknownRating, line, field, "unknown rating '" + std::string(csv::trim(part)) + "'");
    options.push_back(*r);
  }
  try {
    return EffectivenessCell(std::move(options));
  } catch (const Error& e) {
    throw ParseError(line, field, e.what());
  }
}

/// Re-raises catalogue invariant violations that the parsers did not already
/// pin to a position.
inline ControlCatalogue assemble(std::vector<std::string> assets, std::vector<ControlEntry> controls) {
  try {
    return ControlCatalogue(std::move(assets), std::move(controls));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.code(), 0, "", e.what());
  }
}

inline void check_rules(const ControlEntry& entry, std::size_t line, const std::string& field) {
  for (const auto& consequent : entry.dependencies)
    if (consequent.contains(entry.id))
      throw ParseError(line, field, "control '" + entry.id.str() + "' requires itself");
}

}  // namespace detail

inline ControlCatalogue parse_catalogue_csv(std::string_view text) {
  auto records = csv::read_records(text);
  if (records.size() < 2) throw ParseError(records.empty() ? 1 : records[0].line, "", "missing header rows");
  const auto& h1 = records[0];
  const auto& h2 = records[1];

  std::vector<std::string> fixed = {"Control", "Cost", "Mandatory", "Requires"};
  bool has_name = h1.fields.size() > 1 && csv::iequals(csv::trim(h1.fields[1]), "Name");
  if (has_name) fixed.insert(fixed.begin() + 1, "Name");
  const std::size_t nfixed = fixed.size();
  if (h1.fields.size() < nfixed) throw ParseError(h1.line, "", "header row has fewer than " + std::to_string(nfixed) + " columns");
  for (std::size_t i = 0; i < nfixed; ++i)
    if (!csv::iequals(csv::trim(h1.fields[i]), fixed[i]))
      throw ParseError(h1.line, std::to_string(i + 1), "expected header '" + fixed[i] + "', found '" + h1.fields[i] + "'");

  // Trailing empty header cells are tolerated (spreadsheets pad rows).
  std::size_t width = h1.fields.size();
  if ((width - nfixed) % 3 != 0) {
    std::size_t padded = nfixed + (width - nfixed + 2) / 3 * 3;
    width = padded;
  }
  if (width == nfixed) throw ParseError(h1.line, "", "no asset columns");
  std::vector<std::string> assets;
  for (std::size_t col = nfixed; col < width; col += 3) {
    auto name = std::string(csv::trim(h1.fields[col]));
    if (name.empty()) throw ParseError(h1.line, std::to_string(col + 1), "missing asset name");
    for (std::size_t k = 1; k < 3; ++k)
      if (col + k < h1.fields.size() && !csv::trim(h1.fields[col + k]).empty())
        throw ParseError(h1.line, std::to_string(col + k + 1), "asset '" + name + "' must span three blank-continued columns");
    for (const auto& a : assets)
      if (a == name) throw ParseError(h1.line, std::to_string(col + 1), "duplicate asset '" + name + "'");
    assets.push_back(std::move(name));
  }
  for (std::size_t col = 0; col < std::max(width, h2.fields.size()); ++col) {
    std::string_view cell = col < h2.fields.size() ? csv::trim(h2.fields[col]) : std::string_view{};
    if (col < nfixed || col >= width) {
      if (!cell.empty()) throw ParseError(h2.line, std::to_string(col + 1), "expected an empty cell");
      continue;
    }
    char expected = "CIA"[(col - nfixed) % 3];
    if (cell.size() != 1 || cell[0] != expected)
      throw ParseError(h2.line, std::to_string(col + 1), std::string("expected objective '") + expected + "'");
  }

  auto column_label = [&](std::size_t col) {
    if (col < nfixed) return std::to_string(col + 1) + " (" + fixed[col] + ")";
    auto a = (col - nfixed) / 3;
    return std::to_string(col + 1) + " (" + assets[a] + "/" + "CIA"[(col - nfixed) % 3] + ")";
  };

  std::vector<ControlEntry> controls;
  std::unordered_map<std::string, std::size_t> first_line;
  for (std::size_t r = 2; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() > width) {
      bool extra_blank = true;
      for (std::size_t c = width; c < rec.fields.size(); ++c) extra_blank &= csv::trim(rec.fields[c]).empty();
      if (!extra_blank) throw ParseError(rec.line, std::to_string(width + 1), "more cells than header columns");
    }
    auto get = [&](std::size_t col) -> std::string_view {
      return col < rec.fields.size() ? std::string_view(rec.fields[col]) : std::string_view{};
    };
    std::size_t col = 0;
    ControlEntry entry;
    entry.id = detail::parse_id(get(col), rec.line, column_label(col));
    ++col;
    if (has_name) entry.name = std::string(get(col++));
    try {
      entry.cost = Money::parse(get(col));
    } catch (const Error& e) {
      throw ParseError(rec.line, column_label(col), e.what());
    }
    ++col;
    auto mandatory = csv::trim(get(col));
    if (csv::iequals(mandatory, "true")) entry.mandatory = true;
    else if (csv::iequals(mandatory, "false")) entry.mandatory = false;
    else throw ParseError(rec.line, column_label(col), "expected true or false, found '" + std::string(mandatory) + "'");
    ++col;
    entry.dependencies = detail::parse_dependencies(get(col), rec.line, column_label(col));
    detail::check_rules(entry, rec.line, column_label(col));
    ++col;
    for (std::size_t a = 0; a < assets.size(); ++a)
      for (auto o : kObjectives) {
        auto cell = detail::parse_cell(get(col), rec.line, column_label(col));
        if (!cell.is_none()) entry.effectiveness.emplace(ObjectiveRef{assets[a], o}, std::move(cell));
        ++col;
      }
    if (auto [it, fresh] = first_line.emplace(entry.id.str(), rec.line); !fresh)
      throw ParseError(ErrorCode::DuplicateControl, rec.line, column_label(0),
                       "duplicate control '" + entry.id.str() + "' (first defined on row " + std::to_string(it->second) + ")");
    controls.push_back(std::move(entry));
  }
  std::size_t r = 2;
  for (const auto& entry : controls) {
    for (const auto& consequent : entry.dependencies)
      for (const auto& id : consequent)
        if (!first_line.contains(id.str()))
          throw ParseError(ErrorCode::UnknownControlInDependency, records[r].line, column_label(nfixed - 1),
                           "control '" + entry.id.str() + "' requires unknown control '" + id.str() + "'");
    ++r;
  }
  return detail::assemble(std::move(assets), std::move(controls));
}

inline ControlCatalogue parse_catalogue_json(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(0, "", std::string("invalid JSON: ") + e.what());
  }
  auto require = [](bool ok, const std::string& path, const std::string& why) {
    if (!ok) throw ParseError(0, path, why);
  };
  require(doc.is_object(), "$", "expected an object");
  require(doc.contains("assets") && doc["assets"].is_array(), "$.assets", "expected an array of asset names");
  std::vector<std::string> assets;
  for (std::size_t i = 0; i < doc["assets"].size(); ++i) {
    const auto& a = doc["assets"][i];
    require(a.is_string(), "$.assets[" + std::to_string(i) + "]", "expected a string");
    assets.push_back(a.get<std::string>());
  }
  require(doc.contains("controls") && doc["controls"].is_array(), "$.controls", "expected an array");
  std::vector<ControlEntry> controls;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc["controls"].size(); ++i) {
    const auto& c = doc["controls"][i];
    std::string path = "$.controls[" + std::to_string(i) + "]";
    require(c.is_object(), path, "expected an object");
    ControlEntry entry;
    require(c.contains("id") && c["id"].is_string(), path + ".id", "expected a string");
    entry.id = detail::parse_id(c["id"].get<std::string>(), 0, path + ".id");
    if (!seen.insert(entry.id.str()).second)
      throw ParseError(ErrorCode::DuplicateControl, 0, path + ".id", "duplicate control '" + entry.id.str() + "'");
    if (c.contains("name")) {
      require(c["name"].is_string(), path + ".name", "expected a string");
      entry.name = c["name"].get<std::string>();
    }
    require(c.contains("cost"), path + ".cost", "missing cost");
    try {
      if (c["cost"].is_string()) entry.cost = Money::parse(c["cost"].get<std::string>());
      else if (c["cost"].is_number_unsigned()) entry.cost = Money::from_units(c["cost"].get<std::int64_t>());
      else require(false, path + ".cost", "expected a decimal string");
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(0, path + ".cost", e.what());
    }
    require(c.contains("mandatory") && c["mandatory"].is_boolean(), path + ".mandatory", "expected a boolean");
    entry.mandatory = c["mandatory"].get<bool>();
    if (c.contains("requires")) {
      const auto& reqs = c["requires"];
      require(reqs.is_array(), path + ".requires", "expected an array of arrays");
      for (std::size_t k = 0; k < reqs.size(); ++k) {
        std::string rpath = path + ".requires[" + std::to_string(k) + "]";
        require(reqs[k].is_array() && !reqs[k].empty(), rpath, "expected a non-empty array of control ids");
        Combination consequent;
        for (const auto& id : reqs[k]) {
          require(id.is_string(), rpath, "expected control id strings");
          consequent.insert(detail::parse_id(id.get<std::string>(), 0, rpath));
        }
        entry.dependencies.push_back(std::move(consequent));
      }
      detail::check_rules(entry, 0, path + ".requires");
    }
    if (c.contains("effectiveness")) {
      const auto& eff = c["effectiveness"];
      require(eff.is_object(), path + ".effectiveness", "expected an object");
      for (const auto& [asset, objectives] : eff.items()) {
        std::string apath = path + ".effectiveness." + asset;
        require(std::find(assets.begin(), assets.end(), asset) != assets.end(), apath, "unknown asset '" + asset + "'");
        require(objectives.is_object(), apath, "expected an object keyed by C, I, A");
        for (const auto& [obj, ratings] : objectives.items()) {
          std::string opath = apath + "." + obj;
          auto o = parse_objective(obj);
          require(o.has_value(), opath, "objective must be C, I or A");
          require(ratings.is_array() && !ratings.empty(), opath, "expected a non-empty array of ratings");
          std::vector<Rating> options;
          for (const auto& r : ratings) {
            require(r.is_string(), opath, "expected rating strings");
            auto rating = parse_rating(r.get<std::string>());
            if (!rating) throw ParseError(ErrorCode::UnknownRating, 0, opath, "unknown rating '" + r.get<std::string>() + "'");
            options.push_back(*rating);
          }
          try {
            EffectivenessCell cell(std::move(options));
            if (!cell.is_none()) entry.effectiveness.emplace(ObjectiveRef{asset, *o}, std::move(cell));
          } catch (const Error& e) {
            throw ParseError(0, opath, e.what());
          }
        }
      }
    }
    controls.push_back(std::move(entry));
  }
  for (std::size_t i = 0; i < controls.size(); ++i)
    for (const auto& consequent : controls[i].dependencies)
      for (const auto& id : consequent)
        if (!seen.contains(id.str()))
          throw ParseError(ErrorCode::UnknownControlInDependency, 0, "$.controls[" + std::to_string(i) + "].requires",
                           "control '" + controls[i].id.str() + "' requires unknown control '" + id.str() + "'");
  return detail::assemble(std::move(assets), std::move(controls));
}

inline ControlCatalogue parse_catalogue(std::string_view text, SpecFormat format) {
  return format == SpecFormat::Csv ? parse_catalogue_csv(text) : parse_catalogue_json(text);
}

inline ControlCatalogue parse_catalogue(std::istream& in, SpecFormat format) {
  std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_catalogue(text, format);
}

/// JSON when the first non-blank byte is `{`, CSV otherwise.
inline SpecFormat sniff_format(std::string_view text) {
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') continue;
    return c == '{' ? SpecFormat::Json : SpecFormat::Csv;
  }
  return SpecFormat::Csv;
}

namespace detail {

inline std::string join_ratings(const EffectivenessCell& cell) {
  std::string out;
  for (auto r : cell.options()) {
    if (!out.empty()) out += '|';
    out += to_string(r);
  }
  return out;
}

inline std::string join_dependencies(const std::vector<Combination>& deps) {
  std::string out;
  for (const auto& consequent : deps) {
    if (!out.empty()) out += ';';
    bool first = true;
    for (const auto& id : consequent) {
      if (!first) out += '+';
      out += id.str();
      first = false;
    }
  }
  return out;
}

}  // namespace detail

inline std::string write_catalogue_csv(const ControlCatalogue& cat) {
  bool with_name = std::any_of(cat.controls().begin(), cat.controls().end(),
                               [](const ControlEntry& e) { return !e.name.empty(); });
  std::string out = with_name ? "Control,Name,Cost,Mandatory,Requires" : "Control,Cost,Mandatory,Requires";
  for (const auto& a : cat.assets()) out += "," + csv::quote(a) + ",,";
  out += with_name ? "\n,,,," : "\n,,,";
  for (std::size_t i = 0; i < cat.assets().size(); ++i) out += ",C,I,A";
  out += '\n';
  for (const auto& e : cat.controls()) {
    out += e.id.str();
    if (with_name) out += "," + csv::quote(e.name);
    out += "," + e.cost.to_string();
    out += e.mandatory ? ",true" : ",false";
    out += "," + detail::join_dependencies(e.dependencies);
    for (const auto& a : cat.assets())
      for (auto o : kObjectives) {
        const auto* cell = e.cell({a, o});
        out += ",";
        out += cell ? detail::join_ratings(*cell) : "None";
      }
    out += '\n';
  }
  return out;
}

inline nlohmann::json catalogue_to_json(const ControlCatalogue& cat) {
  using nlohmann::json;
  json controls = json::array();
  for (const auto& e : cat.controls()) {
    json c;
    c["id"] = e.id.str();
    if (!e.name.empty()) c["name"] = e.name;
    c["cost"] = e.cost.to_string();
    c["mandatory"] = e.mandatory;
    json reqs = json::array();
    for (const auto& consequent : e.dependencies) {
      json ids = json::array();
      for (const auto& id : consequent) ids.push_back(id.str());
      reqs.push_back(std::move(ids));
    }
    c["requires"] = std::move(reqs);
    json eff = json::object();
    for (const auto& [ref, cell] : e.effectiveness) {
      json ratings = json::array();
      for (auto r : cell.options()) ratings.push_back(std::string(to_string(r)));
      eff[ref.asset][std::string(1, to_char(ref.objective))] = std::move(ratings);
    }
    c["effectiveness"] = std::move(eff);
    controls.push_back(std::move(c));
  }
  return json{{"assets", cat.assets()}, {"controls", std::move(controls)}};
}

inline std::string write_catalogue_json(const ControlCatalogue& cat) { return catalogue_to_json(cat).dump(2) + "\n"; }

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    out += buf;
  }
  return out;
}

/// Digest of the canonical JSON form; equal catalogues have equal digests
/// regardless of source format or cell spelling.
inline std::string catalogue_digest(const ControlCatalogue& cat) { return sha256_hex(catalogue_to_json(cat).dump()); }

}  // namespace ctrlgame
