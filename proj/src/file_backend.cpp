#include "cntuple/file_backend.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <utility>

namespace cntuple {

namespace {

constexpr std::uint64_t kCoalesceGap = 4096;

[[noreturn]] void throw_errno(const std::string& what, const std::string& path) {
  throw IoError(what + " '" + path + "': " + std::strerror(errno));
}

} // namespace

// ── FileAnchor ───────────────────────────────────────────────────────────────

ByteBuffer FileAnchor::serialize() const {
  ByteBuffer out;
  ByteWriter w(out);
  w.bytes(std::span<const std::byte>(reinterpret_cast<const std::byte*>(kFileMagic), 4));
  w.u32(format_version);
  w.u64(header_offset);
  w.u64(header_size_stored);
  w.u64(header_size_uncompressed);
  w.u64(footer_offset);
  w.u64(footer_size_stored);
  w.u64(footer_size_uncompressed);
  w.u16(header_codec_id);
  w.u16(footer_codec_id);
  w.u32(0); // reserved
  return out;
}

FileAnchor FileAnchor::deserialize(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  auto magic = r.raw(4);
  if (std::memcmp(magic.data(), kFileMagic, 4) != 0) {
    throw CorruptionError("not a dataset: bad anchor magic");
  }
  FileAnchor a;
  a.format_version = r.u32();
  if (a.format_version != kFormatVersion) {
    throw CorruptionError("unknown format version " + std::to_string(a.format_version));
  }
  a.header_offset = r.u64();
  a.header_size_stored = r.u64();
  a.header_size_uncompressed = r.u64();
  a.footer_offset = r.u64();
  a.footer_size_stored = r.u64();
  a.footer_size_uncompressed = r.u64();
  a.header_codec_id = r.u16();
  a.footer_codec_id = r.u16();
  if (a.header_size_stored == 0 || a.footer_size_stored == 0) {
    throw CorruptionError("anchor with empty header or footer section");
  }
  return a;
}

// ── FileSink ─────────────────────────────────────────────────────────────────

FileSink::FileSink(const std::string& path, std::uint16_t codec)
    : StagedSink(codec) {
  fd_ = ::open(path.c_str(), O_CREAT | O_TRUNC | O_WRONLY, 0644);
  if (fd_ < 0) throw_errno("cannot create", path);
  ByteBuffer reserved(kAnchorSize, std::byte{0});
  write_at(0, reserved);
}

FileSink::~FileSink() {
  if (fd_ >= 0) ::close(fd_);
}

void FileSink::write_at(std::uint64_t offset, std::span<const std::byte> data) {
  std::size_t written = 0;
  while (written < data.size()) {
    ssize_t n = ::pwrite(fd_, data.data() + written, data.size() - written,
                         static_cast<off_t>(offset + written));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("write failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

PageLocator FileSink::write_page(const PageAddress&, ByteBuffer stored) {
  PageLocator locator;
  locator.where = FileRegion{end_offset_, stored.size()};
  write_at(end_offset_, stored);
  end_offset_ += stored.size();
  return locator;
}

void FileSink::write_metadata(ByteBuffer header_stored, std::uint64_t header_uncompressed,
                              ByteBuffer footer_stored, std::uint64_t footer_uncompressed) {
  anchor_.header_offset = end_offset_;
  anchor_.header_size_stored = header_stored.size();
  anchor_.header_size_uncompressed = header_uncompressed;
  anchor_.header_codec_id = codec_id();
  write_at(end_offset_, header_stored);
  end_offset_ += header_stored.size();

  anchor_.footer_offset = end_offset_;
  anchor_.footer_size_stored = footer_stored.size();
  anchor_.footer_size_uncompressed = footer_uncompressed;
  anchor_.footer_codec_id = codec_id();
  write_at(end_offset_, footer_stored);
  end_offset_ += footer_stored.size();

  // The anchor goes in last: a crash before this write leaves a file that
  // fails attach with a defined error.
  write_at(0, anchor_.serialize());
}

// ── FileSource ───────────────────────────────────────────────────────────────

FileSource::FileSource(const std::string& path) {
  fd_ = ::open(path.c_str(), O_RDONLY);
  if (fd_ < 0) throw_errno("cannot open", path);
  struct stat st{};
  if (::fstat(fd_, &st) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw_errno("cannot stat", path);
  }
  file_size_ = static_cast<std::uint64_t>(st.st_size);
  try {
    if (file_size_ < kAnchorSize) {
      throw CorruptionError("file too small to hold an anchor");
    }
    anchor_ = FileAnchor::deserialize(read_at(0, kAnchorSize));

    auto section_in_file = [&](std::uint64_t offset, std::uint64_t size) {
      return offset >= kAnchorSize && size <= file_size_ && offset <= file_size_ - size;
    };
    if (!section_in_file(anchor_.header_offset, anchor_.header_size_stored) ||
        !section_in_file(anchor_.footer_offset, anchor_.footer_size_stored)) {
      throw CorruptionError("anchor sections point outside the file");
    }

    ByteBuffer header_bytes =
        decompress(read_at(anchor_.header_offset, anchor_.header_size_stored),
                   anchor_.header_codec_id, anchor_.header_size_uncompressed);
    ByteBuffer footer_bytes =
        decompress(read_at(anchor_.footer_offset, anchor_.footer_size_stored),
                   anchor_.footer_codec_id, anchor_.footer_size_uncompressed);
    header_ = deserialize_header(header_bytes);
    footer_ = deserialize_footer(footer_bytes);
    if (schema_digest(header_bytes) != footer_.schema_digest) {
      throw CorruptionError("schema digest mismatch between header and footer");
    }
  } catch (...) {
    ::close(fd_);
    fd_ = -1;
    throw;
  }
  // attach reads count as metadata, page counters start at zero
  io_.meta_ops = 3;
  io_.meta_bytes = kAnchorSize + anchor_.header_size_stored + anchor_.footer_size_stored;
  physical_reads_ = 0;
}

FileSource::~FileSource() {
  if (fd_ >= 0) ::close(fd_);
}

ByteBuffer FileSource::read_at(std::uint64_t offset, std::uint64_t size) {
  if (offset > file_size_ || size > file_size_ - offset) {
    throw CorruptionError("read of [" + std::to_string(offset) + ", +" +
                          std::to_string(size) + ") beyond end of file");
  }
  ByteBuffer out(size);
  std::size_t got = 0;
  while (got < size) {
    ssize_t n = ::pread(fd_, out.data() + got, size - got,
                        static_cast<off_t>(offset + got));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw IoError(std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw CorruptionError("short read: file truncated");
    got += static_cast<std::size_t>(n);
  }
  ++physical_reads_;
  return out;
}

ByteBuffer FileSource::populate_page(const PageLocator& locator) {
  const auto* region = std::get_if<FileRegion>(&locator.where);
  if (region == nullptr) {
    throw UsageError("file source given an object locator");
  }
  if (region->size == 0 || locator.uncompressed_size == 0) {
    throw CorruptionError("locator with zero size");
  }
  ByteBuffer stored = read_at(region->offset, region->size);
  io_.page_ops += 1;
  io_.page_bytes += region->size;
  return decompress(stored, locator.codec_id, locator.uncompressed_size);
}

std::map<std::uint32_t, std::vector<Page>>
FileSource::load_cluster(std::uint32_t cluster_id, const std::set<std::uint32_t>& columns) {
  if (cluster_id >= footer_.clusters.size()) {
    throw UsageError("cluster id " + std::to_string(cluster_id) + " out of range");
  }
  const ClusterDescriptor& cluster = footer_.clusters[cluster_id];

  struct Pending {
    std::uint32_t column_id;
    const PageRef* ref;
    std::uint64_t offset;
  };
  std::vector<Pending> pending;
  for (std::uint32_t column_id : columns) {
    auto it = cluster.page_lists.find(column_id);
    if (it == cluster.page_lists.end()) continue;
    for (const PageRef& ref : it->second) {
      const auto* region = std::get_if<FileRegion>(&ref.locator.where);
      if (region == nullptr) throw CorruptionError("object locator in a file dataset");
      pending.push_back({column_id, &ref, region->offset});
    }
  }

  std::sort(pending.begin(), pending.end(),
            [](const Pending& a, const Pending& b) { return a.offset < b.offset; });

  std::map<std::uint32_t, std::vector<Page>> result;
  std::size_t i = 0;
  while (i < pending.size()) {
    // Grow a run while the next locator starts within the coalescing gap.
    std::uint64_t run_start = pending[i].offset;
    std::uint64_t run_end = run_start + pending[i].ref->locator.stored_size();
    std::size_t j = i + 1;
    while (j < pending.size() && pending[j].offset < run_end + kCoalesceGap) {
      run_end = std::max(run_end, pending[j].offset + pending[j].ref->locator.stored_size());
      ++j;
    }
    ByteBuffer run = read_at(run_start, run_end - run_start);
    for (std::size_t k = i; k < j; ++k) {
      const PageRef& ref = *pending[k].ref;
      std::uint64_t size = ref.locator.stored_size();
      std::span<const std::byte> stored(run.data() + (pending[k].offset - run_start), size);
      io_.page_ops += 1;
      io_.page_bytes += size;
      Page page;
      page.column_id = pending[k].column_id;
      page.first_element_index = ref.first_element_index;
      page.n_elements = ref.n_elements;
      page.payload = decompress(stored, ref.locator.codec_id, ref.locator.uncompressed_size);
      result[pending[k].column_id].push_back(std::move(page));
    }
    i = j;
  }
  for (auto& [column_id, pages] : result) {
    std::sort(pages.begin(), pages.end(), [](const Page& a, const Page& b) {
      return a.first_element_index < b.first_element_index;
    });
  }
  return result;
}

} // namespace cntuple
