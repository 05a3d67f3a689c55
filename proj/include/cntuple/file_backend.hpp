#pragma once

#include "cntuple/pagestore.hpp"

#include <cstdint>
#include <string>

namespace cntuple {

inline constexpr char kFileMagic[4] = {'C', 'N', 'T', 'P'};
inline constexpr std::uint64_t kAnchorSize = 64;

// Fixed 64-byte record at file offset 0, written last. Locates the header and
// footer sections, which physically follow the pages.
struct FileAnchor {
  std::uint32_t format_version = kFormatVersion;
  std::uint64_t header_offset = 0;
  std::uint64_t header_size_stored = 0;
  std::uint64_t header_size_uncompressed = 0;
  std::uint64_t footer_offset = 0;
  std::uint64_t footer_size_stored = 0;
  std::uint64_t footer_size_uncompressed = 0;
  std::uint16_t header_codec_id = kCodecNone;
  std::uint16_t footer_codec_id = kCodecNone;

  ByteBuffer serialize() const;
  static FileAnchor deserialize(std::span<const std::byte> bytes);
};

// Single-file sink: 64 reserved anchor bytes, pages appended in commit order,
// then header, footer, and the anchor overwrite. Reopening an existing path
// truncates it.
class FileSink final : public StagedSink {
public:
  explicit FileSink(const std::string& path, std::uint16_t codec = kCodecNone);
  ~FileSink() override;

  FileSink(const FileSink&) = delete;
  FileSink& operator=(const FileSink&) = delete;

  const FileAnchor& anchor() const { return anchor_; }

protected:
  PageLocator write_page(const PageAddress& address, ByteBuffer stored) override;
  void write_metadata(ByteBuffer header_stored, std::uint64_t header_uncompressed,
                      ByteBuffer footer_stored, std::uint64_t footer_uncompressed) override;

private:
  void write_at(std::uint64_t offset, std::span<const std::byte> data);

  int fd_ = -1;
  std::uint64_t end_offset_ = kAnchorSize;
  FileAnchor anchor_;
};

// Read side. Positioned reads only, safe for concurrent use after attach.
class FileSource final : public PageSource {
public:
  // Attaches: reads and validates anchor, header, footer.
  explicit FileSource(const std::string& path);
  ~FileSource() override;

  FileSource(const FileSource&) = delete;
  FileSource& operator=(const FileSource&) = delete;

  const DatasetHeader& header() const override { return header_; }
  const DatasetFooter& footer() const override { return footer_; }
  const FileAnchor& anchor() const { return anchor_; }

  ByteBuffer populate_page(const PageLocator& locator) override;

  // Coalesces offset-adjacent locators (gap < 4 KiB) into single reads.
  std::map<std::uint32_t, std::vector<Page>>
  load_cluster(std::uint32_t cluster_id, const std::set<std::uint32_t>& columns) override;

  IoAccounting io_accounting() const override { return io_.snapshot(); }
  std::uint64_t physical_reads() const { return physical_reads_.load(); }

private:
  ByteBuffer read_at(std::uint64_t offset, std::uint64_t size);

  int fd_ = -1;
  std::uint64_t file_size_ = 0;
  FileAnchor anchor_;
  DatasetHeader header_;
  DatasetFooter footer_;
  AtomicIoAccounting io_;
  std::atomic<std::uint64_t> physical_reads_{0};
};

} // namespace cntuple
