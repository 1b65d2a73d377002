#pragma once

// Human Mortality Database 1x1 text tables in, result CSVs out.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mortmix/estimation.hpp"

namespace mortmix {

enum class TableKind { deaths, exposures };

struct HmdRow {
  int year = 0;
  int age = 0;
  bool open_interval = false;  // the "110+" row; `age` holds the lower bound
  std::optional<double> female;
  std::optional<double> male;
  std::optional<double> total;

  std::optional<double> value(Sex sex) const;
};

struct HmdTable {
  TableKind kind = TableKind::deaths;
  std::string title;
  std::vector<HmdRow> rows;
};

/// Layout: title line, blank line, `Year Age Female Male Total`, then
/// whitespace-separated rows. "." marks a missing value.
HmdTable parse_hmd(std::istream& in, TableKind kind);
HmdTable parse_hmd(const std::filesystem::path& path, TableKind kind);

/// One slice per (year, sex), years ascending and sexes in the given order.
/// Keeps ages >= min_age, drops the open interval, and drops (and counts) rows
/// with a missing value or zero exposure.
std::vector<LifeTableSlice> build_slices(const HmdTable& deaths, const HmdTable& exposures, int min_age = 20,
                                         std::span<const Sex> sexes = {}, const std::string& population = "");

inline constexpr const char* kResultsHeader =
    "population,year,sex,family,a,b,c,gamma,k,a1,b1,log_posterior,converged,pi,threshold_age,"
    "modal_age_senescent,modal_age_overall";

/// Writes the header and one row per result; returns the number of rows.
/// Siler's senescent pair (a2, b2) goes in the a and b columns.
std::size_t write_results(std::ostream& out, std::span<const FitResult> results);
/// Writes through a temporary file and renames, so a failure leaves no partial file.
std::size_t write_results(const std::filesystem::path& path, std::span<const FitResult> results);

struct ResultRecord {
  std::string population;
  int year = 0;
  std::string sex;
  std::string family;
  bool converged = false;
  /// Every numeric column by header name; empty fields are nullopt.
  std::map<std::string, std::optional<double>> values;
};

std::vector<ResultRecord> read_results(std::istream& in);

}  // namespace mortmix
