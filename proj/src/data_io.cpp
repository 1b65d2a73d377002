#include "mortmix/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>
#include <tuple>

#include "mortmix/csv.hpp"
#include "mortmix/errors.hpp"

namespace mortmix {
namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char ch) { return std::isspace(ch) != 0; });
}

int parse_int(std::string_view text, std::size_t line, const char* what) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(std::string("bad ") + what + " '" + std::string(text) + "'", line);
  }
  return value;
}

std::optional<double> parse_value(const std::string& text, std::size_t line) {
  if (text == ".") return std::nullopt;
  double v = 0.0;
  try {
    v = csv::parse_number(text);
  } catch (const std::invalid_argument&) {
    throw ParseError("bad value '" + text + "'", line);
  }
  if (!(v >= 0.0) || !std::isfinite(v)) throw ParseError("negative or non-finite value '" + text + "'", line);
  return v;
}

using Key = std::tuple<int, int, bool>;

Key key_of(const HmdRow& r) { return {r.year, r.age, r.open_interval}; }

std::string optional_field(std::optional<double> v) { return v ? csv::format_number(*v) : std::string(); }

}  // namespace

std::optional<double> HmdRow::value(Sex sex) const {
  switch (sex) {
    case Sex::female:
      return female;
    case Sex::male:
      return male;
    case Sex::total:
      return total;
  }
  return std::nullopt;
}

HmdTable parse_hmd(std::istream& in, TableKind kind) {
  HmdTable table;
  table.kind = kind;
  std::string line;
  std::size_t n = 0;

  if (!std::getline(in, line)) throw FormatError("empty input: expected a title line");
  ++n;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.title = line;
  if (!std::getline(in, line) || !blank(line)) throw FormatError("line 2: expected a blank line after the title");
  ++n;
  if (!std::getline(in, line)) throw FormatError("missing column header line");
  ++n;
  const std::vector<std::string> expected = {"Year", "Age", "Female", "Male", "Total"};
  if (tokens(line) != expected) {
    throw FormatError("line 3: expected header 'Year Age Female Male Total'");
  }

  while (std::getline(in, line)) {
    ++n;
    const auto t = tokens(line);
    if (t.empty()) continue;
    if (t.size() != 5) throw ParseError("expected 5 fields, found " + std::to_string(t.size()), n);
    HmdRow row;
    row.year = parse_int(t[0], n, "year");
    std::string_view age = t[1];
    if (!age.empty() && age.back() == '+') {
      row.open_interval = true;
      age.remove_suffix(1);
    }
    row.age = parse_int(age, n, "age");
    if (row.age < 0) throw ParseError("negative age", n);
    row.female = parse_value(t[2], n);
    row.male = parse_value(t[3], n);
    row.total = parse_value(t[4], n);
    table.rows.push_back(row);
  }
  if (in.bad()) throw IoError("read failed");
  return table;
}

HmdTable parse_hmd(const std::filesystem::path& path, TableKind kind) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return parse_hmd(in, kind);
}

std::vector<LifeTableSlice> build_slices(const HmdTable& deaths, const HmdTable& exposures, int min_age,
                                         std::span<const Sex> sexes, const std::string& population) {
  static constexpr Sex kDefaultSexes[] = {Sex::female, Sex::male};
  if (sexes.empty()) sexes = kDefaultSexes;

  std::map<Key, const HmdRow*> exposure_by_key;
  for (const auto& r : exposures.rows) {
    if (!exposure_by_key.emplace(key_of(r), &r).second) {
      throw AlignmentError("duplicate exposures row for year " + std::to_string(r.year) + " age " +
                           std::to_string(r.age));
    }
  }
  std::set<Key> seen;
  for (const auto& r : deaths.rows) {
    if (!exposure_by_key.contains(key_of(r)) || !seen.insert(key_of(r)).second) {
      throw AlignmentError("deaths row for year " + std::to_string(r.year) + " age " + std::to_string(r.age) +
                           (r.open_interval ? "+" : "") + " has no unique exposures counterpart");
    }
  }
  if (seen.size() != exposure_by_key.size()) {
    throw AlignmentError("exposures table has rows missing from the deaths table");
  }

  std::map<int, std::vector<const HmdRow*>> by_year;
  for (const auto& r : deaths.rows) by_year[r.year].push_back(&r);

  std::vector<LifeTableSlice> slices;
  for (auto& [year, rows] : by_year) {
    std::sort(rows.begin(), rows.end(), [](const HmdRow* l, const HmdRow* r) { return l->age < r->age; });
    for (Sex sex : sexes) {
      LifeTableSlice slice{population, year, sex, {}, 0};
      for (const HmdRow* d : rows) {
        if (d->open_interval || d->age < min_age) continue;
        const HmdRow* e = exposure_by_key.at(key_of(*d));
        const auto dv = d->value(sex);
        const auto ev = e->value(sex);
        if (!dv || !ev || !(*ev > 0.0)) {
          ++slice.excluded_rows;
          continue;
        }
        slice.rows.push_back({d->age, *dv, *ev});
      }
      slices.push_back(std::move(slice));
    }
  }
  return slices;
}

std::size_t write_results(std::ostream& out, std::span<const FitResult> results) {
  out << kResultsHeader << '\n';
  for (const auto& r : results) {
    const auto names = parameter_names(family_of(r.model));
    const auto values = parameters(r.model);
    auto param = [&](const std::string& name) -> std::optional<double> {
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return values[i];
      }
      return std::nullopt;
    };
    const bool siler = family_of(r.model) == Family::siler;
    const auto a = siler ? param("a2") : param("a");
    const auto b = siler ? param("b2") : param("b");

    out << csv::escape(r.population) << ',' << r.year << ',' << sex_tag(r.sex) << ','
        << family_tag(family_of(r.model)) << ',' << optional_field(a) << ',' << optional_field(b) << ','
        << optional_field(param("c")) << ',' << optional_field(param("gamma")) << ',' << optional_field(param("k"))
        << ',' << optional_field(param("a1")) << ',' << optional_field(param("b1")) << ','
        << csv::format_number(r.log_posterior) << ',' << (r.converged ? "true" : "false") << ','
        << csv::format_number(r.derived.pi) << ',' << csv::format_number(r.derived.threshold_age) << ','
        << csv::format_number(r.derived.modal_age_senescent) << ','
        << csv::format_number(r.derived.modal_age_overall) << '\n';
  }
  return results.size();
}

std::size_t write_results(const std::filesystem::path& path, std::span<const FitResult> results) {
  auto tmp = path;
  tmp += ".tmp";
  std::size_t rows = 0;
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    rows = write_results(out, results);
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw IoError("write to '" + path.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move results into '" + path.string() + "'");
  }
  return rows;
}

std::vector<ResultRecord> read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = csv::split_record(line);
  if (header != csv::split_record(kResultsHeader)) throw FormatError("unexpected results header");

  std::vector<ResultRecord> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = csv::split_record(line);
    if (f.size() != header.size()) throw ParseError("expected " + std::to_string(header.size()) + " fields", n);
    ResultRecord rec;
    rec.population = f[0];
    rec.year = parse_int(f[1], n, "year");
    rec.sex = f[2];
    rec.family = f[3];
    rec.converged = f[12] == "true";
    for (std::size_t i = 4; i < f.size(); ++i) {
      if (i == 12) continue;
      if (f[i].empty()) {
        rec.values[header[i]] = std::nullopt;
        continue;
      }
      try {
        rec.values[header[i]] = csv::parse_number(f[i]);
      } catch (const std::invalid_argument&) {
        throw ParseError("bad number in column " + header[i], n);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace mortmix
