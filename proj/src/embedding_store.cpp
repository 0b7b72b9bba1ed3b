#include "binderlsc/embedding_store.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <optional>

#include <json.hpp>

#include "binderlsc/error.hpp"

namespace binderlsc {

namespace {

// Parses numbers straight to float so that the shortest float32 decimal read
// back from a lines archive is bit-identical to what was written.
using FloatJson = nlohmann::basic_json<std::map, std::vector, std::string, bool, std::int64_t,
                                       std::uint64_t, float>;

std::string record_ref(std::size_t index) { return "record " + std::to_string(index); }

void check_finite(const std::vector<float>& v, std::size_t index) {
  for (float x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::Data, record_ref(index) + ": non-finite value");
  }
}

// Little-endian primitives.

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_string(std::string& out, const std::string& s) {
  if (s.size() > UINT32_MAX) throw Error(ErrorCode::Format, "string too long for packed index");
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

class ByteSource {
 public:
  explicit ByteSource(std::ifstream& in) : in_(in) {}

  void read(void* dst, std::size_t n, const char* what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw Error(ErrorCode::Format, std::string("packed archive truncated in ") + what);
    }
  }
  std::uint64_t uint(int bytes, const char* what) {
    unsigned char buf[8];
    read(buf, static_cast<std::size_t>(bytes), what);
    return get_le(buf, bytes);
  }
  std::string string(std::uint64_t remaining, const char* what) {
    const auto len = uint(4, what);
    if (len > remaining) throw Error(ErrorCode::Format, std::string("bad string length in ") + what);
    std::string s(len, '\0');
    if (len) read(s.data(), len, what);
    return s;
  }

 private:
  std::ifstream& in_;
};

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::string provenance_json(const ArchiveProvenance& p) {
  nlohmann::json j = {{"encoder", p.encoder}, {"corpus", p.corpus}};
  return j.dump();
}

ArchiveProvenance provenance_from(const FloatJson& j) {
  ArchiveProvenance p;
  if (j.contains("encoder") && j["encoder"].is_string()) p.encoder = j["encoder"].get<std::string>();
  if (j.contains("corpus") && j["corpus"].is_string()) p.corpus = j["corpus"].get<std::string>();
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// EmbeddingArchive

EmbeddingArchive::EmbeddingArchive(std::size_t dimension, ArchiveProvenance provenance)
    : dimension_(dimension), provenance_(std::move(provenance)) {
  if (dimension_ == 0) throw Error(ErrorCode::Format, "archive dimension must be positive");
}

void EmbeddingArchive::add(UsageRecord record) {
  const std::size_t index = records_.size();
  if (record.vector.size() != dimension_) {
    throw Error(ErrorCode::Format, record_ref(index) + ": vector has " +
                                       std::to_string(record.vector.size()) +
                                       " values, archive dimension is " +
                                       std::to_string(dimension_));
  }
  check_finite(record.vector, index);
  groups_[{record.word, record.period}].push_back(index);
  records_.push_back(std::move(record));
}

std::vector<std::string> EmbeddingArchive::words() const {
  std::vector<std::string> out;
  for (const auto& [key, idx] : groups_) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

std::vector<std::string> EmbeddingArchive::periods() const {
  std::set<std::string> seen;
  for (const auto& [key, idx] : groups_) seen.insert(key.second);
  return {seen.begin(), seen.end()};
}

bool EmbeddingArchive::has(const std::string& word, const std::string& period) const {
  return groups_.contains({word, period});
}

const std::vector<std::size_t>& EmbeddingArchive::group(const std::string& word,
                                                        const std::string& period) const {
  static const std::vector<std::size_t> none;
  const auto it = groups_.find({word, period});
  return it == groups_.end() ? none : it->second;
}

namespace {

UsageSet gather(const EmbeddingArchive& archive, const std::vector<std::size_t>& idx,
                std::string word, std::string period) {
  UsageSet set{std::move(word), std::move(period),
               Eigen::MatrixXd(static_cast<Eigen::Index>(idx.size()),
                               static_cast<Eigen::Index>(archive.dimension())),
               {}};
  set.occurrence_ids.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& rec = archive.records()[idx[r]];
    for (std::size_t c = 0; c < rec.vector.size(); ++c) {
      set.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rec.vector[c];
    }
    set.occurrence_ids.push_back(rec.occurrence_id);
  }
  return set;
}

}  // namespace

UsageSet EmbeddingArchive::usage_set(const std::string& word, const std::string& period) const {
  const auto& idx = group(word, period);
  if (idx.empty()) {
    throw Error(ErrorCode::EmptyUsage,
                "no occurrences of '" + word + "' in period '" + period + "'");
  }
  return gather(*this, idx, word, period);
}

UsageSet EmbeddingArchive::pooled_usage_set(const std::string& word,
                                            const std::set<std::string>& periods) const {
  std::vector<std::size_t> idx;
  for (const auto& [key, group_idx] : groups_) {
    if (key.first != word) continue;
    if (!periods.empty() && !periods.contains(key.second)) continue;
    idx.insert(idx.end(), group_idx.begin(), group_idx.end());
  }
  if (idx.empty()) throw Error(ErrorCode::EmptyUsage, "no occurrences of '" + word + "'");
  std::sort(idx.begin(), idx.end());
  const std::string first_period = records_[idx.front()].period;
  return gather(*this, idx, word, first_period);
}

ArchiveFormat format_from_extension(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".jsonl") return ArchiveFormat::Lines;
  if (ext == ".semb") return ArchiveFormat::Packed;
  throw Error(ErrorCode::Config, "cannot infer archive format from '" + path.string() +
                                     "' (expected .jsonl or .semb)");
}

// ---------------------------------------------------------------------------
// Reader

class ArchiveReader::Impl {
 public:
  Impl(const std::filesystem::path& path, ArchiveFormat format) : format_(format) {
    in_.open(path, std::ios::binary);
    if (!in_) throw Error(ErrorCode::Io, "cannot open " + path.string());
    if (format == ArchiveFormat::Packed) {
      open_packed(std::filesystem::file_size(path));
    } else {
      open_lines();
    }
  }

  std::size_t dimension() const { return dimension_; }
  const ArchiveProvenance& provenance() const { return provenance_; }

  bool next(UsageRecord& out) {
    return format_ == ArchiveFormat::Packed ? next_packed(out) : next_lines(out);
  }

 private:
  void open_packed(std::uintmax_t file_size) {
    ByteSource src(in_);
    char magic[4];
    src.read(magic, 4, "header");
    if (std::memcmp(magic, kPackedMagic, 4) != 0) {
      throw Error(ErrorCode::Format, "not a packed embedding archive (bad magic)");
    }
    const auto version = src.uint(2, "header");
    if (version != kPackedVersion) {
      throw Error(ErrorCode::Format, "unsupported packed archive version " + std::to_string(version));
    }
    dimension_ = src.uint(4, "header");
    count_ = src.uint(8, "header");
    if (dimension_ == 0) throw Error(ErrorCode::Format, "packed archive declares dimension 0");
    keys_.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count_, file_size / 12)));
    for (std::uint64_t i = 0; i < count_; ++i) {
      RecordKey key;
      key.word = src.string(file_size, "index block");
      key.period = src.string(file_size, "index block");
      key.occurrence_id = src.string(file_size, "index block");
      keys_.push_back(std::move(key));
    }
    const auto values_start = static_cast<std::uint64_t>(in_.tellg());
    const std::uint64_t values_end = values_start + count_ * dimension_ * 4;
    if (values_end > file_size) throw Error(ErrorCode::Format, "packed archive truncated in values");
    if (values_end < file_size) {
      in_.seekg(static_cast<std::streamoff>(values_end));
      char tmagic[4];
      src.read(tmagic, 4, "trailer");
      if (std::memcmp(tmagic, kPackedTrailerMagic, 4) != 0) {
        throw Error(ErrorCode::Format, "unexpected bytes after packed values");
      }
      const auto len = src.uint(4, "trailer");
      if (values_end + 8 + len != file_size) throw Error(ErrorCode::Format, "bad trailer length");
      std::string body(len, '\0');
      if (len) src.read(body.data(), len, "trailer");
      try {
        provenance_ = provenance_from(FloatJson::parse(body));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Format, std::string("bad trailer: ") + e.what());
      }
      in_.seekg(static_cast<std::streamoff>(values_start));
    }
  }

  bool next_packed(UsageRecord& out) {
    if (cursor_ >= count_) return false;
    const auto& key = keys_[cursor_];
    out.word = key.word;
    out.period = key.period;
    out.occurrence_id = key.occurrence_id;
    buffer_.resize(dimension_ * 4);
    ByteSource(in_).read(buffer_.data(), buffer_.size(), "values");
    out.vector.resize(dimension_);
    const auto* bytes = reinterpret_cast<const unsigned char*>(buffer_.data());
    for (std::size_t j = 0; j < dimension_; ++j) {
      out.vector[j] = std::bit_cast<float>(static_cast<std::uint32_t>(get_le(bytes + 4 * j, 4)));
    }
    check_finite(out.vector, cursor_);
    ++cursor_;
    return true;
  }

  void open_lines() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto j = parse_line(line);
      if (j.contains("meta")) {
        const auto& meta = j["meta"];
        if (!meta.contains("dimension") || !meta["dimension"].is_number_unsigned()) {
          throw Error(ErrorCode::Format, "line " + std::to_string(line_no_) +
                                             ": meta object needs an unsigned 'dimension'");
        }
        dimension_ = meta["dimension"].get<std::size_t>();
        if (dimension_ == 0) throw Error(ErrorCode::Format, "archive declares dimension 0");
        provenance_ = provenance_from(meta);
      } else {
        pending_ = to_record(j);
        dimension_ = pending_->vector.size();
        if (dimension_ == 0) throw Error(ErrorCode::Format, record_ref(0) + ": empty vector");
      }
      return;
    }
    throw Error(ErrorCode::Format, "lines archive has neither a meta line nor any record");
  }

  FloatJson parse_line(const std::string& line) const {
    try {
      auto j = FloatJson::parse(line);
      if (!j.is_object()) throw Error(ErrorCode::Format, "not a JSON object");
      return j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Format, "line " + std::to_string(line_no_) + ": " + e.what());
    }
  }

  UsageRecord to_record(const FloatJson& j) const {
    const std::string where = record_ref(cursor_) + " (line " + std::to_string(line_no_) + ")";
    UsageRecord rec;
    auto field = [&](const char* name) {
      if (!j.contains(name) || !j[name].is_string()) {
        throw Error(ErrorCode::Format, where + ": missing string field '" + name + "'");
      }
      return j[name].get<std::string>();
    };
    rec.word = field("word");
    rec.period = field("period");
    rec.occurrence_id = field("occurrence_id");
    if (!j.contains("vector") || !j["vector"].is_array()) {
      throw Error(ErrorCode::Format, where + ": missing array field 'vector'");
    }
    rec.vector.reserve(j["vector"].size());
    for (const auto& v : j["vector"]) {
      if (!v.is_number()) throw Error(ErrorCode::Format, where + ": non-numeric vector entry");
      rec.vector.push_back(v.get<float>());
    }
    return rec;
  }

  bool next_lines(UsageRecord& out) {
    if (pending_) {
      out = std::move(*pending_);
      pending_.reset();
    } else {
      std::string line;
      bool got = false;
      while (std::getline(in_, line)) {
        ++line_no_;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = parse_line(line);
        if (j.contains("meta")) {
          throw Error(ErrorCode::Format, "line " + std::to_string(line_no_) +
                                             ": meta line must be the first line");
        }
        out = to_record(j);
        got = true;
        break;
      }
      if (!got) return false;
    }
    if (out.vector.size() != dimension_) {
      throw Error(ErrorCode::Format, record_ref(cursor_) + ": vector has " +
                                         std::to_string(out.vector.size()) +
                                         " values, archive dimension is " +
                                         std::to_string(dimension_));
    }
    check_finite(out.vector, cursor_);
    ++cursor_;
    return true;
  }

  ArchiveFormat format_;
  std::ifstream in_;
  std::size_t dimension_ = 0;
  ArchiveProvenance provenance_;
  std::uint64_t count_ = 0;
  std::uint64_t cursor_ = 0;
  std::vector<RecordKey> keys_;
  std::string buffer_;
  std::size_t line_no_ = 0;
  std::optional<UsageRecord> pending_;
};

ArchiveReader::ArchiveReader(const std::filesystem::path& path, ArchiveFormat format)
    : impl_(std::make_unique<Impl>(path, format)) {}
ArchiveReader::~ArchiveReader() = default;
std::size_t ArchiveReader::dimension() const { return impl_->dimension(); }
const ArchiveProvenance& ArchiveReader::provenance() const { return impl_->provenance(); }
bool ArchiveReader::next(UsageRecord& out) { return impl_->next(out); }

// ---------------------------------------------------------------------------
// Writer

class ArchiveWriter::Impl {
 public:
  Impl(const std::filesystem::path& path, ArchiveFormat format, ArchiveHeader header)
      : path_(path), format_(format), header_(std::move(header)) {
    if (header_.dimension == 0) throw Error(ErrorCode::Format, "archive dimension must be positive");
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorCode::Io, "cannot write " + path.string());
    std::string head;
    if (format_ == ArchiveFormat::Packed) {
      head.append(kPackedMagic, 4);
      put_u16(head, kPackedVersion);
      if (header_.dimension > UINT32_MAX) throw Error(ErrorCode::Format, "dimension too large");
      put_u32(head, static_cast<std::uint32_t>(header_.dimension));
      put_u64(head, header_.keys.size());
      for (const auto& key : header_.keys) {
        put_string(head, key.word);
        put_string(head, key.period);
        put_string(head, key.occurrence_id);
      }
    } else {
      head = "{\"meta\":{\"dimension\":" + std::to_string(header_.dimension) +
             ",\"encoder\":" + json_string(header_.provenance.encoder) +
             ",\"corpus\":" + json_string(header_.provenance.corpus) + "}}\n";
    }
    emit(head);
  }

  void append(const UsageRecord& rec) {
    if (finished_) throw Error(ErrorCode::Io, "append after finish");
    if (rec.vector.size() != header_.dimension) {
      throw Error(ErrorCode::Format, record_ref(written_) + ": vector has " +
                                         std::to_string(rec.vector.size()) +
                                         " values, archive dimension is " +
                                         std::to_string(header_.dimension));
    }
    check_finite(rec.vector, written_);
    std::string buf;
    if (format_ == ArchiveFormat::Packed) {
      if (written_ >= header_.keys.size()) {
        throw Error(ErrorCode::Consistency, "more records than declared in the packed index");
      }
      const auto& key = header_.keys[written_];
      if (key.word != rec.word || key.period != rec.period ||
          key.occurrence_id != rec.occurrence_id) {
        throw Error(ErrorCode::Consistency,
                    record_ref(written_) + ": key does not match the packed index");
      }
      buf.reserve(rec.vector.size() * 4);
      for (float v : rec.vector) put_u32(buf, std::bit_cast<std::uint32_t>(v));
    } else {
      buf = "{\"word\":" + json_string(rec.word) + ",\"period\":" + json_string(rec.period) +
            ",\"occurrence_id\":" + json_string(rec.occurrence_id) + ",\"vector\":[";
      for (std::size_t j = 0; j < rec.vector.size(); ++j) {
        if (j) buf += ',';
        char num[32];
        const auto [ptr, ec] = std::to_chars(num, num + sizeof num, rec.vector[j]);
        buf.append(num, ptr);
      }
      buf += "]}\n";
    }
    emit(buf);
    ++written_;
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    if (format_ == ArchiveFormat::Packed) {
      if (written_ != header_.keys.size()) {
        throw Error(ErrorCode::Consistency, "packed archive declared " +
                                                std::to_string(header_.keys.size()) +
                                                " records but " + std::to_string(written_) +
                                                " were written");
      }
      if (!header_.provenance.empty()) {
        const auto body = provenance_json(header_.provenance);
        std::string trailer(kPackedTrailerMagic, 4);
        put_u32(trailer, static_cast<std::uint32_t>(body.size()));
        trailer += body;
        emit(trailer);
      }
    }
    out_.flush();
    if (!out_) throw Error(ErrorCode::Io, "write failed for " + path_.string());
    out_.close();
  }

  bool finished() const { return finished_; }

 private:
  void emit(const std::string& bytes) {
    out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out_) throw Error(ErrorCode::Io, "write failed for " + path_.string());
  }

  std::filesystem::path path_;
  ArchiveFormat format_;
  ArchiveHeader header_;
  std::ofstream out_;
  std::size_t written_ = 0;
  bool finished_ = false;
};

ArchiveWriter::ArchiveWriter(const std::filesystem::path& path, ArchiveFormat format,
                             ArchiveHeader header)
    : impl_(std::make_unique<Impl>(path, format, std::move(header))) {}

ArchiveWriter::~ArchiveWriter() {
  if (impl_ && !impl_->finished()) {
    try {
      impl_->finish();
    } catch (...) {
    }
  }
}

void ArchiveWriter::append(const UsageRecord& record) { impl_->append(record); }
void ArchiveWriter::finish() { impl_->finish(); }

// ---------------------------------------------------------------------------

ArchiveHeader scan_header(const std::filesystem::path& path, ArchiveFormat format) {
  ArchiveReader reader(path, format);
  ArchiveHeader header;
  header.dimension = reader.dimension();
  header.provenance = reader.provenance();
  UsageRecord rec;
  while (reader.next(rec)) {
    header.keys.push_back({rec.word, rec.period, rec.occurrence_id});
  }
  return header;
}

EmbeddingArchive read_archive(const std::filesystem::path& path, ArchiveFormat format) {
  ArchiveReader reader(path, format);
  EmbeddingArchive archive(reader.dimension(), reader.provenance());
  UsageRecord rec;
  while (reader.next(rec)) archive.add(std::move(rec));
  return archive;
}

void write_archive(const EmbeddingArchive& archive, const std::filesystem::path& path,
                   ArchiveFormat format) {
  ArchiveHeader header;
  header.dimension = archive.dimension();
  header.provenance = archive.provenance();
  if (format == ArchiveFormat::Packed) {
    header.keys.reserve(archive.size());
    for (const auto& rec : archive.records()) {
      header.keys.push_back({rec.word, rec.period, rec.occurrence_id});
    }
  }
  ArchiveWriter writer(path, format, std::move(header));
  for (const auto& rec : archive.records()) writer.append(rec);
  writer.finish();
}

Eigen::VectorXd mean_rows(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) throw Error(ErrorCode::EmptyUsage, "mean of an empty set");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) sum[c] += rows(r, c);
  }
  return sum / static_cast<double>(rows.rows());
}

Eigen::VectorXd corpus_mean(const EmbeddingArchive& archive, const std::string& word,
                            const std::set<std::string>& periods) {
  const auto d = static_cast<Eigen::Index>(archive.dimension());
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
  std::size_t n = 0;
  for (const auto& rec : archive.records()) {
    if (rec.word != word) continue;
    if (!periods.empty() && !periods.contains(rec.period)) continue;
    for (Eigen::Index c = 0; c < d; ++c) sum[c] += rec.vector[static_cast<std::size_t>(c)];
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::MissingWord, "no occurrences of '" + word + "'");
  return sum / static_cast<double>(n);
}

}  // namespace binderlsc
