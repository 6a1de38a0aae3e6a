#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "minenav/trial.hpp"

namespace minenav {

class RecordsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One JSON object per line, fields in a fixed order.
std::string RecordToJson(const TrialRecord& record);
TrialRecord RecordFromJson(const std::string& line);

void WriteJsonl(std::ostream& out, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> ReadJsonl(std::istream& in);
std::vector<TrialRecord> ReadJsonl(const std::filesystem::path& path);

// Writes to a temporary sibling and renames it into place.
void WriteFileAtomic(const std::filesystem::path& path,
                     const std::string& content);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for one value
};

MeanStd ComputeMeanStd(const std::vector<double>& values);

struct SummaryRow {
  std::string goal;
  int successes = 0;
  int trials = 0;
  MeanStd path;   // p_i, m
  MeanStd ratio;  // p_i / l_i
  MeanStd spl;    // per-trial S_i * l_i / max(p_i, l_i)
  MeanStd time;   // s
};

// One row per goal in order of first appearance, then "All": the mean and
// spread of the per-goal means. Records with l_i <= 0 are counted but left
// out of ratio and SPL.
std::vector<SummaryRow> SummarizeRecords(const std::vector<TrialRecord>& records);

void WriteSummaryCsv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace minenav
