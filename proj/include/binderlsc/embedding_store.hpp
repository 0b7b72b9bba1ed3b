#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace binderlsc {

// One contextualized occurrence of a word. Vectors are stored in single
// precision (the encoder's native width); arithmetic is done in double.
struct UsageRecord {
  std::string word;
  std::string period;
  std::string occurrence_id;
  std::vector<float> vector;
};

// All occurrences of one word in one period, one row per occurrence.
struct UsageSet {
  std::string word;
  std::string period;
  Eigen::MatrixXd vectors;                 // n x d
  std::vector<std::string> occurrence_ids;  // n
};

struct ArchiveProvenance {
  std::string encoder;
  std::string corpus;

  bool empty() const { return encoder.empty() && corpus.empty(); }
  bool operator==(const ArchiveProvenance&) const = default;
};

class EmbeddingArchive {
 public:
  explicit EmbeddingArchive(std::size_t dimension, ArchiveProvenance provenance = {});

  std::size_t dimension() const { return dimension_; }
  const ArchiveProvenance& provenance() const { return provenance_; }
  std::size_t size() const { return records_.size(); }
  const std::vector<UsageRecord>& records() const { return records_; }

  // Throws Error(Format) on a dimension mismatch, Error(Data) on NaN/Inf.
  void add(UsageRecord record);

  std::vector<std::string> words() const;
  std::vector<std::string> periods() const;
  bool has(const std::string& word, const std::string& period) const;
  // Record indices for (word, period) in archive order; empty if absent.
  const std::vector<std::size_t>& group(const std::string& word, const std::string& period) const;

  // Throws Error(EmptyUsage) when the word has no occurrence in the period.
  UsageSet usage_set(const std::string& word, const std::string& period) const;
  // All occurrences of the word across the given periods (all periods when
  // the set is empty), in archive order, tagged with the first period seen.
  UsageSet pooled_usage_set(const std::string& word, const std::set<std::string>& periods) const;

 private:
  std::size_t dimension_;
  ArchiveProvenance provenance_;
  std::vector<UsageRecord> records_;
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> groups_;
};

enum class ArchiveFormat { Lines, Packed };

// ".jsonl" -> Lines, ".semb" -> Packed; anything else is Error(Config).
ArchiveFormat format_from_extension(const std::filesystem::path& path);

inline constexpr char kPackedMagic[4] = {'S', 'E', 'M', 'B'};
inline constexpr std::uint16_t kPackedVersion = 1;
inline constexpr char kPackedTrailerMagic[4] = {'S', 'M', 'E', 'T'};

struct RecordKey {
  std::string word;
  std::string period;
  std::string occurrence_id;
};

// Everything about an archive except the vectors. The key list is what the
// packed writer needs up front.
struct ArchiveHeader {
  std::size_t dimension = 0;
  ArchiveProvenance provenance;
  std::vector<RecordKey> keys;
};

// Sequential record reader; holds at most one vector in memory.
class ArchiveReader {
 public:
  ArchiveReader(const std::filesystem::path& path, ArchiveFormat format);
  ~ArchiveReader();
  ArchiveReader(const ArchiveReader&) = delete;
  ArchiveReader& operator=(const ArchiveReader&) = delete;

  std::size_t dimension() const;
  const ArchiveProvenance& provenance() const;
  // Fills `out` with the next record; false at end of archive.
  bool next(UsageRecord& out);

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

class ArchiveWriter {
 public:
  // Packed output needs the full key list (count and index block precede the
  // values); for lines output only dimension and provenance are used.
  ArchiveWriter(const std::filesystem::path& path, ArchiveFormat format, ArchiveHeader header);
  ~ArchiveWriter();
  ArchiveWriter(const ArchiveWriter&) = delete;
  ArchiveWriter& operator=(const ArchiveWriter&) = delete;

  // For packed output the record must match the next key in the header.
  void append(const UsageRecord& record);
  // Writes the trailer and flushes; also run by the destructor if omitted.
  void finish();

 private:
  class Impl;
  std::unique_ptr<Impl> impl_;
};

// Reads dimension, provenance, and record keys without keeping vectors.
ArchiveHeader scan_header(const std::filesystem::path& path, ArchiveFormat format);

EmbeddingArchive read_archive(const std::filesystem::path& path, ArchiveFormat format);
void write_archive(const EmbeddingArchive& archive, const std::filesystem::path& path,
                   ArchiveFormat format);

// Mean over rows, summed sequentially in row order.
Eigen::VectorXd mean_rows(const Eigen::MatrixXd& rows);

// Mean vector of `word` over every record in the selected periods (all
// periods when the set is empty). Throws Error(MissingWord) if none match.
Eigen::VectorXd corpus_mean(const EmbeddingArchive& archive, const std::string& word,
                            const std::set<std::string>& periods = {});

}  // namespace binderlsc
