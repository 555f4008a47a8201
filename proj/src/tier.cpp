#include "aos/tier.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <list>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <unordered_map>

#include "aos/byte_io.hpp"
#include "aos/error.hpp"

namespace aos {

std::string_view tier_kind_name(TierKind kind) {
  switch (kind) {
    case TierKind::kDram: return "dram";
    case TierKind::kNvmDirect: return "nvm";
    case TierKind::kMemoryMode: return "mm";
  }
  return "?";
}

std::optional<TierKind> parse_tier_kind(std::string_view name) {
  if (name == "dram") return TierKind::kDram;
  if (name == "nvm" || name == "nvm_direct") return TierKind::kNvmDirect;
  if (name == "mm" || name == "memory_mode") return TierKind::kMemoryMode;
  return std::nullopt;
}

std::uint64_t CostModel::parse_ns(std::string_view text) {
  // Fixed-point parse: at most three fractional digits (picosecond resolution).
  std::uint64_t whole = 0;
  std::uint64_t frac = 0;
  int frac_digits = 0;
  bool seen_dot = false;
  bool any_digit = false;
  for (char c : text) {
    if (c == '.' && !seen_dot) {
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      any_digit = true;
      if (!seen_dot) {
        whole = whole * 10 + static_cast<std::uint64_t>(c - '0');
      } else if (frac_digits < 3) {
        frac = frac * 10 + static_cast<std::uint64_t>(c - '0');
        ++frac_digits;
      } else {
        throw Error(ErrorCode::kInvalidArgument,
                    "cost has sub-picosecond precision: " + std::string(text));
      }
    } else {
      throw Error(ErrorCode::kInvalidArgument, "bad cost value: " + std::string(text));
    }
  }
  if (!any_digit) throw Error(ErrorCode::kInvalidArgument, "empty cost value");
  while (frac_digits < 3) {
    frac *= 10;
    ++frac_digits;
  }
  return whole * 1000 + frac;
}

CostModel CostModel::from_env() { return from_env(CostModel{}); }

CostModel CostModel::from_env(CostModel base) {
  auto apply = [](const char* name, std::uint64_t& field) {
    if (const char* v = std::getenv(name); v != nullptr && *v != '\0') {
      field = parse_ns(v);
    }
  };
  apply("AOS_COST_DRAM_READ_NS", base.dram_read_ps_per_byte);
  apply("AOS_COST_DRAM_WRITE_NS", base.dram_write_ps_per_byte);
  apply("AOS_COST_NVM_READ_NS", base.nvm_read_ps_per_byte);
  apply("AOS_COST_NVM_WRITE_NS", base.nvm_write_ps_per_byte);
  apply("AOS_COST_PER_OP_NS", base.per_op_latency_ps);
  return base;
}

TierCounters TierCounters::operator-(const TierCounters& b) const {
  TierCounters d;
  d.kind = kind;
  d.bytes_read = bytes_read - b.bytes_read;
  d.bytes_written = bytes_written - b.bytes_written;
  d.cache_bytes_read = cache_bytes_read - b.cache_bytes_read;
  d.cache_bytes_written = cache_bytes_written - b.cache_bytes_written;
  d.cache_hits = cache_hits - b.cache_hits;
  d.cache_misses = cache_misses - b.cache_misses;
  d.ops = ops - b.ops;
  d.modeled_time_ps = modeled_time_ps - b.modeled_time_ps;
  return d;
}

TierCounters& TierCounters::operator+=(const TierCounters& o) {
  bytes_read += o.bytes_read;
  bytes_written += o.bytes_written;
  cache_bytes_read += o.cache_bytes_read;
  cache_bytes_written += o.cache_bytes_written;
  cache_hits += o.cache_hits;
  cache_misses += o.cache_misses;
  ops += o.ops;
  modeled_time_ps += o.modeled_time_ps;
  return *this;
}

std::uint64_t recompute_modeled_time_ps(const TierCounters& c, const CostModel& m) {
  std::uint64_t t = c.ops * m.per_op_latency_ps;
  switch (c.kind) {
    case TierKind::kDram:
      t += c.bytes_read * m.dram_read_ps_per_byte +
           c.bytes_written * m.dram_write_ps_per_byte;
      break;
    case TierKind::kNvmDirect:
      t += c.bytes_read * m.nvm_read_ps_per_byte +
           c.bytes_written * m.nvm_write_ps_per_byte;
      break;
    case TierKind::kMemoryMode:
      t += c.bytes_read * m.nvm_read_ps_per_byte +
           c.bytes_written * m.nvm_write_ps_per_byte +
           c.cache_bytes_read * m.dram_read_ps_per_byte +
           c.cache_bytes_written * m.dram_write_ps_per_byte;
      break;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Tier base: atomic counters and cost charging.

namespace {
thread_local TrafficScope* current_scope = nullptr;
}  // namespace

TrafficScope::TrafficScope() : previous_(current_scope) {
  for (std::size_t i = 0; i < kTierKindCount; ++i) {
    totals_[i].kind = static_cast<TierKind>(i);
  }
  current_scope = this;
}

TrafficScope::~TrafficScope() { current_scope = previous_; }

TierCounters* Tier::scope_slot() const {
  if (current_scope == nullptr) return nullptr;
  return &current_scope->totals_[static_cast<std::size_t>(kind_)];
}

struct Tier::Counters {
  std::atomic<std::uint64_t> bytes_read{0};
  std::atomic<std::uint64_t> bytes_written{0};
  std::atomic<std::uint64_t> cache_bytes_read{0};
  std::atomic<std::uint64_t> cache_bytes_written{0};
  std::atomic<std::uint64_t> cache_hits{0};
  std::atomic<std::uint64_t> cache_misses{0};
  std::atomic<std::uint64_t> ops{0};
  std::atomic<std::uint64_t> modeled_time_ps{0};
};

Tier::Tier(TierKind kind, const ArenaConfig& config)
    : kind_(kind),
      cost_(config.cost_model),
      inject_delay_(config.inject_delay),
      counters_(std::make_shared<Counters>()) {}

TierCounters Tier::counters() const {
  TierCounters c;
  c.kind = kind_;
  c.bytes_read = counters_->bytes_read.load();
  c.bytes_written = counters_->bytes_written.load();
  c.cache_bytes_read = counters_->cache_bytes_read.load();
  c.cache_bytes_written = counters_->cache_bytes_written.load();
  c.cache_hits = counters_->cache_hits.load();
  c.cache_misses = counters_->cache_misses.load();
  c.ops = counters_->ops.load();
  c.modeled_time_ps = counters_->modeled_time_ps.load();
  return c;
}

void Tier::charge_read(Medium m, std::uint64_t bytes) {
  std::uint64_t ps;
  if (m == Medium::kNvm) {
    ps = bytes * cost_.nvm_read_ps_per_byte;
  } else {
    ps = bytes * cost_.dram_read_ps_per_byte;
  }
  TierCounters* slot = scope_slot();
  if (kind_ == TierKind::kMemoryMode && m == Medium::kDram) {
    counters_->cache_bytes_read += bytes;
    if (slot) slot->cache_bytes_read += bytes;
  } else {
    counters_->bytes_read += bytes;
    if (slot) slot->bytes_read += bytes;
  }
  counters_->modeled_time_ps += ps;
  if (slot) slot->modeled_time_ps += ps;
  maybe_delay(ps);
}

void Tier::charge_write(Medium m, std::uint64_t bytes) {
  std::uint64_t ps;
  if (m == Medium::kNvm) {
    ps = bytes * cost_.nvm_write_ps_per_byte;
  } else {
    ps = bytes * cost_.dram_write_ps_per_byte;
  }
  TierCounters* slot = scope_slot();
  if (kind_ == TierKind::kMemoryMode && m == Medium::kDram) {
    counters_->cache_bytes_written += bytes;
    if (slot) slot->cache_bytes_written += bytes;
  } else {
    counters_->bytes_written += bytes;
    if (slot) slot->bytes_written += bytes;
  }
  counters_->modeled_time_ps += ps;
  if (slot) slot->modeled_time_ps += ps;
  maybe_delay(ps);
}

void Tier::charge_op() {
  counters_->ops += 1;
  counters_->modeled_time_ps += cost_.per_op_latency_ps;
  if (TierCounters* slot = scope_slot()) {
    slot->ops += 1;
    slot->modeled_time_ps += cost_.per_op_latency_ps;
  }
  maybe_delay(cost_.per_op_latency_ps);
}

void Tier::count_hit() {
  counters_->cache_hits += 1;
  if (TierCounters* slot = scope_slot()) slot->cache_hits += 1;
}

void Tier::count_miss() {
  counters_->cache_misses += 1;
  if (TierCounters* slot = scope_slot()) slot->cache_misses += 1;
}

void Tier::maybe_delay(std::uint64_t ps) const {
  if (inject_delay_ && ps >= 1000) {
    std::this_thread::sleep_for(std::chrono::nanoseconds(ps / 1000));
  }
}

namespace {

Error not_found(const ObjectId& id) {
  return Error(ErrorCode::kNotFound, "object " + id.to_string() + " not found");
}

void check_range(const ObjectId& id, std::uint64_t size, std::uint64_t offset,
                 std::uint64_t length) {
  if (offset > size || length > size - offset) {
    throw Error(ErrorCode::kInvalidArgument,
                "range [" + std::to_string(offset) + ", +" + std::to_string(length) +
                    ") overflows object " + id.to_string() + " of " +
                    std::to_string(size) + " bytes");
  }
}

// Heap buffer whose data pointer has a chosen residue modulo 8, so that a
// payload's f64 section can be aliased after the header.
class AlignedBytes {
 public:
  AlignedBytes(std::size_t size, std::size_t residue)
      : storage_(new std::uint64_t[size / 8 + 2]),
        data_(reinterpret_cast<std::uint8_t*>(storage_.get()) + residue % 8),
        size_(size) {}

  std::uint8_t* data() { return data_; }
  const std::uint8_t* data() const { return data_; }
  std::size_t size() const { return size_; }
  std::span<std::uint8_t> span() { return {data_, size_}; }
  ByteView view() const { return {data_, size_}; }

 private:
  std::unique_ptr<std::uint64_t[]> storage_;
  std::uint8_t* data_;
  std::size_t size_;
};

std::size_t residue_for(std::size_t aligned_at) { return (8 - aligned_at % 8) % 8; }

// Bump allocator with a coalescing first-fit free list. Offsets are relative
// to the start of the data region.
class RegionAllocator {
 public:
  explicit RegionAllocator(std::uint64_t capacity) : capacity_(capacity) {}

  std::optional<std::uint64_t> allocate(std::uint64_t length, std::size_t aligned_at) {
    auto fix = [&](std::uint64_t at) {
      return (8 - (at + aligned_at) % 8) % 8;
    };
    for (auto it = free_.begin(); it != free_.end(); ++it) {
      std::uint64_t pad = fix(it->first);
      if (it->second >= pad + length) {
        std::uint64_t start = it->first;
        std::uint64_t avail = it->second;
        free_.erase(it);
        if (pad > 0) free_.emplace(start, pad);
        std::uint64_t tail = avail - pad - length;
        if (tail > 0) free_.emplace(start + pad + length, tail);
        used_ += length;
        return start + pad;
      }
    }
    std::uint64_t pad = fix(bump_);
    if (bump_ + pad + length > capacity_ || bump_ + pad + length < bump_) {
      return std::nullopt;
    }
    if (pad > 0) insert_free(bump_, pad);
    std::uint64_t at = bump_ + pad;
    bump_ = at + length;
    used_ += length;
    return at;
  }

  void release(std::uint64_t offset, std::uint64_t length) {
    used_ -= length;
    insert_free(offset, length);
  }

  // Rebuilds state from the live regions of a recovered directory.
  void rebuild(std::vector<std::pair<std::uint64_t, std::uint64_t>> regions) {
    std::sort(regions.begin(), regions.end());
    free_.clear();
    used_ = 0;
    bump_ = 0;
    for (auto [off, len] : regions) {
      if (off > bump_) free_.emplace(bump_, off - bump_);
      used_ += len;
      bump_ = off + len;
    }
  }

  std::uint64_t used() const { return used_; }
  std::uint64_t capacity() const { return capacity_; }

 private:
  void insert_free(std::uint64_t offset, std::uint64_t length) {
    if (length == 0) return;
    auto next = free_.lower_bound(offset);
    if (next != free_.begin()) {
      auto prev = std::prev(next);
      if (prev->first + prev->second == offset) {
        offset = prev->first;
        length += prev->second;
        free_.erase(prev);
      }
    }
    if (next != free_.end() && offset + length == next->first) {
      length += next->second;
      free_.erase(next);
    }
    if (offset + length == bump_) {
      bump_ = offset;
    } else {
      free_.emplace(offset, length);
    }
  }

  std::uint64_t capacity_;
  std::uint64_t bump_ = 0;
  std::uint64_t used_ = 0;
  std::map<std::uint64_t, std::uint64_t> free_;
};

// ---------------------------------------------------------------------------

class DramTier final : public Tier {
 public:
  explicit DramTier(const ArenaConfig& config)
      : Tier(TierKind::kDram, config), capacity_(config.capacity_bytes) {}

  RegionRef store(const ObjectId& id, ByteView bytes, std::size_t aligned_at) override {
    auto buf = std::make_shared<AlignedBytes>(bytes.size(), residue_for(aligned_at));
    {
      std::unique_lock lock(mu_);
      if (objects_.contains(id)) {
        throw Error(ErrorCode::kAlreadyExists, "object " + id.to_string() + " exists");
      }
      if (used_ + bytes.size() > capacity_) {
        throw Error(ErrorCode::kOutOfSpace,
                    "dram tier full: need " + std::to_string(bytes.size()) + ", free " +
                        std::to_string(capacity_ - used_));
      }
      used_ += bytes.size();
      if (!bytes.empty()) std::memcpy(buf->data(), bytes.data(), bytes.size());
      objects_.emplace(id, buf);
    }
    charge_op();
    charge_write(Medium::kDram, bytes.size());
    return {TierKind::kDram, reinterpret_cast<std::uintptr_t>(buf->data()), bytes.size()};
  }

  ReadView read_view(const ObjectId& id) override {
    auto buf = find(id);
    charge_op();
    charge_read(Medium::kDram, buf->size());
    return {buf->view(), buf};
  }

  void write_in_place(const ObjectId& id, std::uint64_t offset, ByteView bytes) override {
    auto buf = find(id);
    check_range(id, buf->size(), offset, bytes.size());
    if (!bytes.empty()) std::memcpy(buf->data() + offset, bytes.data(), bytes.size());
    charge_op();
    charge_write(Medium::kDram, bytes.size());
  }

  void modify_in_place(const ObjectId& id, std::uint64_t offset, std::uint64_t length,
                       const std::function<void(std::span<std::uint8_t>)>& fn) override {
    auto buf = find(id);
    check_range(id, buf->size(), offset, length);
    fn(buf->span().subspan(offset, length));
    charge_op();
    charge_read(Medium::kDram, length);
    charge_write(Medium::kDram, length);
  }

  void erase(const ObjectId& id) override {
    std::unique_lock lock(mu_);
    auto it = objects_.find(id);
    if (it == objects_.end()) throw not_found(id);
    used_ -= it->second->size();
    objects_.erase(it);
  }

  void flush() override {}

  bool contains(const ObjectId& id) const override {
    std::shared_lock lock(mu_);
    return objects_.contains(id);
  }

  std::optional<RegionRef> region(const ObjectId& id) const override {
    std::shared_lock lock(mu_);
    auto it = objects_.find(id);
    if (it == objects_.end()) return std::nullopt;
    return RegionRef{TierKind::kDram,
                     reinterpret_cast<std::uintptr_t>(it->second->data()),
                     it->second->size()};
  }

  std::vector<ObjectId> list() const override {
    std::shared_lock lock(mu_);
    std::vector<ObjectId> ids;
    ids.reserve(objects_.size());
    for (const auto& [id, _] : objects_) ids.push_back(id);
    return ids;
  }

  std::uint64_t capacity_bytes() const override { return capacity_; }
  std::uint64_t used_bytes() const override {
    std::shared_lock lock(mu_);
    return used_;
  }

 private:
  std::shared_ptr<AlignedBytes> find(const ObjectId& id) const {
    std::shared_lock lock(mu_);
    auto it = objects_.find(id);
    if (it == objects_.end()) throw not_found(id);
    return it->second;
  }

  mutable std::shared_mutex mu_;
  std::uint64_t capacity_;
  std::uint64_t used_ = 0;
  std::unordered_map<ObjectId, std::shared_ptr<AlignedBytes>> objects_;
};

// ---------------------------------------------------------------------------
// Memory-mapped arena file: header, data region, trailing directory.

class Arena {
 public:
  struct Entry {
    std::uint64_t offset;  // relative to the data region
    std::uint64_t length;
  };

  Arena(const std::filesystem::path& path, std::uint64_t capacity, bool recover)
      : path_(path), capacity_(capacity), alloc_(capacity) {
    if (capacity == 0) throw Error(ErrorCode::kInvalidArgument, "arena capacity must be > 0");
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) sys_fail("open");
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::kIo, "arena " + path.string() + " is already open");
    }
    try {
      struct stat st{};
      if (::fstat(fd_, &st) != 0) sys_fail("fstat");
      if (recover && st.st_size > 0) {
        load(static_cast<std::uint64_t>(st.st_size));
      }
      if (::ftruncate(fd_, static_cast<off_t>(arena_format::kHeaderBytes + capacity_)) != 0) {
        sys_fail("ftruncate");
      }
      map();
      // Re-anchors the recovered directory past the resized data region.
      persist_directory();
    } catch (...) {
      if (base_ != nullptr) ::munmap(base_, mapped_);
      ::close(fd_);
      throw;
    }
  }

  ~Arena() {
    try {
      persist_directory();
    } catch (...) {
    }
    if (base_ != nullptr) ::munmap(base_, mapped_);
    ::close(fd_);
  }

  Arena(const Arena&) = delete;
  Arena& operator=(const Arena&) = delete;

  std::uint8_t* data() { return base_ + arena_format::kHeaderBytes; }

  std::uint64_t allocate(std::uint64_t length, std::size_t aligned_at) {
    // Data region starts 64-byte aligned, so relative alignment is absolute.
    auto at = alloc_.allocate(length, aligned_at);
    if (!at) {
      throw Error(ErrorCode::kOutOfSpace,
                  "arena " + path_.string() + " full: need " + std::to_string(length) +
                      ", used " + std::to_string(alloc_.used()) + " of " +
                      std::to_string(capacity_));
    }
    return *at;
  }
  void release(const Entry& e) { alloc_.release(e.offset, e.length); }

  std::unordered_map<ObjectId, Entry>& directory() { return dir_; }
  const std::unordered_map<ObjectId, Entry>& directory() const { return dir_; }
  std::uint64_t capacity() const { return capacity_; }
  std::uint64_t used() const { return alloc_.used(); }

  // Syncs the data region and rewrites the trailing directory.
  void persist_directory() {
    if (base_ == nullptr) return;
    if (::msync(base_, mapped_, MS_SYNC) != 0) sys_fail("msync");
    Bytes out;
    ByteWriter w(out);
    w.u32(static_cast<std::uint32_t>(dir_.size()));
    // Sorted by offset so the file contents are deterministic.
    std::vector<std::pair<ObjectId, Entry>> sorted(dir_.begin(), dir_.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.second.offset < b.second.offset; });
    for (const auto& [id, e] : sorted) {
      w.id(id);
      w.u64(e.offset + arena_format::kHeaderBytes);
      w.u64(e.length);
    }
    std::uint64_t dir_offset = arena_format::kHeaderBytes + capacity_;
    if (::ftruncate(fd_, static_cast<off_t>(dir_offset + out.size())) != 0) {
      sys_fail("ftruncate");
    }
    pwrite_all(out.data(), out.size(), dir_offset);
    write_header(dir_offset);
    if (::fsync(fd_) != 0) sys_fail("fsync");
  }

 private:
  [[noreturn]] void sys_fail(const char* what) const {
    throw Error(ErrorCode::kIo,
                std::string(what) + " " + path_.string() + ": " + std::strerror(errno));
  }

  void pwrite_all(const void* p, std::size_t n, std::uint64_t off) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    while (n > 0) {
      ssize_t k = ::pwrite(fd_, b, n, static_cast<off_t>(off));
      if (k < 0) {
        if (errno == EINTR) continue;
        sys_fail("pwrite");
      }
      b += k;
      n -= static_cast<std::size_t>(k);
      off += static_cast<std::uint64_t>(k);
    }
  }

  void pread_all(void* p, std::size_t n, std::uint64_t off) const {
    auto* b = static_cast<std::uint8_t*>(p);
    while (n > 0) {
      ssize_t k = ::pread(fd_, b, n, static_cast<off_t>(off));
      if (k < 0) {
        if (errno == EINTR) continue;
        sys_fail("pread");
      }
      if (k == 0) throw Error(ErrorCode::kCorrupt, "arena " + path_.string() + " truncated");
      b += k;
      n -= static_cast<std::size_t>(k);
      off += static_cast<std::uint64_t>(k);
    }
  }

  void write_header(std::uint64_t dir_offset) {
    Bytes h;
    ByteWriter w(h);
    w.raw(arena_format::kMagic, 4);
    w.u16(arena_format::kVersion);
    w.u64(capacity_);
    w.u64(dir_offset);
    h.resize(arena_format::kHeaderBytes, 0);
    std::memcpy(base_, h.data(), h.size());
  }

  void load(std::uint64_t file_size) {
    auto corrupt = [&](const std::string& why) {
      return Error(ErrorCode::kCorrupt, "arena " + path_.string() + ": " + why);
    };
    if (file_size < arena_format::kHeaderBytes) throw corrupt("file shorter than header");
    Bytes h(arena_format::kHeaderBytes);
    pread_all(h.data(), h.size(), 0);
    if (std::memcmp(h.data(), arena_format::kMagic, 4) != 0) throw corrupt("bad magic");
    ByteReader r(ByteView(h).subspan(4));
    if (r.u16() != arena_format::kVersion) throw corrupt("unsupported version");
    std::uint64_t old_capacity = r.u64();
    std::uint64_t dir_offset = r.u64();
    if (dir_offset == 0) return;  // never flushed: nothing to recover
    if (dir_offset != arena_format::kHeaderBytes + old_capacity || dir_offset + 4 > file_size) {
      throw corrupt("directory offset out of bounds");
    }
    Bytes dir(file_size - dir_offset);
    pread_all(dir.data(), dir.size(), dir_offset);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> regions;
    try {
      ByteReader d(dir, dir_offset);
      std::uint32_t count = d.u32();
      for (std::uint32_t i = 0; i < count; ++i) {
        ObjectId id = d.id();
        std::uint64_t off = d.u64();
        std::uint64_t len = d.u64();
        if (off < arena_format::kHeaderBytes || off + len < off ||
            off + len > arena_format::kHeaderBytes + old_capacity) {
          throw corrupt("directory entry out of bounds");
        }
        Entry e{off - arena_format::kHeaderBytes, len};
        if (!dir_.emplace(id, e).second) throw corrupt("duplicate directory entry");
        regions.emplace_back(e.offset, e.length);
      }
      d.expect_done("arena directory");
    } catch (const DecodeError& e) {
      throw corrupt(e.what());
    }
    std::sort(regions.begin(), regions.end());
    for (std::size_t i = 1; i < regions.size(); ++i) {
      if (regions[i - 1].first + regions[i - 1].second > regions[i].first) {
        throw corrupt("overlapping directory entries");
      }
    }
    if (!regions.empty() && regions.back().first + regions.back().second > capacity_) {
      throw Error(ErrorCode::kInvalidArgument,
                  "arena " + path_.string() + ": capacity " + std::to_string(capacity_) +
                      " smaller than existing directory extent");
    }
    alloc_.rebuild(std::move(regions));
  }

  void map() {
    mapped_ = arena_format::kHeaderBytes + capacity_;
    void* p = ::mmap(nullptr, mapped_, PROT_READ | PROT_WRITE, MAP_SHARED, fd_, 0);
    if (p == MAP_FAILED) sys_fail("mmap");
    base_ = static_cast<std::uint8_t*>(p);
  }

  std::filesystem::path path_;
  std::uint64_t capacity_;
  int fd_ = -1;
  std::uint8_t* base_ = nullptr;
  std::size_t mapped_ = 0;
  RegionAllocator alloc_;
  std::unordered_map<ObjectId, Entry> dir_;
};

// App Direct analogue: objects live in the mapped arena and are read in place.
class NvmDirectTier final : public Tier {
 public:
  explicit NvmDirectTier(const ArenaConfig& config)
      : Tier(TierKind::kNvmDirect, config),
        arena_(config.path, config.capacity_bytes, /*recover=*/true) {}

  RegionRef store(const ObjectId& id, ByteView bytes, std::size_t aligned_at) override {
    Arena::Entry e;
    {
      std::unique_lock lock(mu_);
      if (arena_.directory().contains(id)) {
        throw Error(ErrorCode::kAlreadyExists, "object " + id.to_string() + " exists");
      }
      e.offset = arena_.allocate(bytes.size(), aligned_at);
      e.length = bytes.size();
      arena_.directory().emplace(id, e);
    }
    if (!bytes.empty()) std::memcpy(arena_.data() + e.offset, bytes.data(), bytes.size());
    charge_op();
    charge_write(Medium::kNvm, bytes.size());
    return {TierKind::kNvmDirect, e.offset, e.length};
  }

  ReadView read_view(const ObjectId& id) override {
    Arena::Entry e = find(id);
    charge_op();
    charge_read(Medium::kNvm, e.length);
    return {ByteView(arena_.data() + e.offset, e.length), nullptr};
  }

  void write_in_place(const ObjectId& id, std::uint64_t offset, ByteView bytes) override {
    Arena::Entry e = find(id);
    check_range(id, e.length, offset, bytes.size());
    if (!bytes.empty()) {
      std::memcpy(arena_.data() + e.offset + offset, bytes.data(), bytes.size());
    }
    charge_op();
    charge_write(Medium::kNvm, bytes.size());
  }

  void modify_in_place(const ObjectId& id, std::uint64_t offset, std::uint64_t length,
                       const std::function<void(std::span<std::uint8_t>)>& fn) override {
    Arena::Entry e = find(id);
    check_range(id, e.length, offset, length);
    fn(std::span<std::uint8_t>(arena_.data() + e.offset + offset, length));
    charge_op();
    charge_read(Medium::kNvm, length);
    charge_write(Medium::kNvm, length);
  }

  void erase(const ObjectId& id) override {
    std::unique_lock lock(mu_);
    auto it = arena_.directory().find(id);
    if (it == arena_.directory().end()) throw not_found(id);
    arena_.release(it->second);
    arena_.directory().erase(it);
  }

  void flush() override {
    std::unique_lock lock(mu_);
    arena_.persist_directory();
  }

  bool contains(const ObjectId& id) const override {
    std::shared_lock lock(mu_);
    return arena_.directory().contains(id);
  }

  std::optional<RegionRef> region(const ObjectId& id) const override {
    std::shared_lock lock(mu_);
    auto it = arena_.directory().find(id);
    if (it == arena_.directory().end()) return std::nullopt;
    return RegionRef{TierKind::kNvmDirect, it->second.offset, it->second.length};
  }

  std::vector<ObjectId> list() const override {
    std::shared_lock lock(mu_);
    std::vector<ObjectId> ids;
    for (const auto& [id, _] : arena_.directory()) ids.push_back(id);
    return ids;
  }

  std::uint64_t capacity_bytes() const override { return arena_.capacity(); }
  std::uint64_t used_bytes() const override {
    std::shared_lock lock(mu_);
    return arena_.used();
  }

 private:
  Arena::Entry find(const ObjectId& id) const {
    std::shared_lock lock(mu_);
    auto it = arena_.directory().find(id);
    if (it == arena_.directory().end()) throw not_found(id);
    return it->second;
  }

  mutable std::shared_mutex mu_;
  Arena arena_;
};

// Memory Mode analogue: a volatile arena behind a whole-object LRU cache.
class MemoryModeTier final : public Tier {
 public:
  explicit MemoryModeTier(const ArenaConfig& config)
      : Tier(TierKind::kMemoryMode, config),
        arena_(config.path, config.capacity_bytes, /*recover=*/false),
        cache_capacity_(config.cache_capacity_bytes) {
    if (cache_capacity_ >= config.capacity_bytes) {
      throw Error(ErrorCode::kInvalidArgument,
                  "memory-mode cache capacity must be smaller than arena capacity");
    }
  }

  ~MemoryModeTier() override = default;

  RegionRef store(const ObjectId& id, ByteView bytes, std::size_t aligned_at) override {
    Arena::Entry e;
    {
      std::lock_guard lock(mu_);
      if (arena_.directory().contains(id)) {
        throw Error(ErrorCode::kAlreadyExists, "object " + id.to_string() + " exists");
      }
      e.offset = arena_.allocate(bytes.size(), aligned_at);
      e.length = bytes.size();
      arena_.directory().emplace(id, e);
    }
    // Written through to the arena; the first read is a cold miss.
    if (!bytes.empty()) std::memcpy(arena_.data() + e.offset, bytes.data(), bytes.size());
    charge_op();
    charge_write(Medium::kNvm, bytes.size());
    return {TierKind::kMemoryMode, e.offset, e.length};
  }

  ReadView read_view(const ObjectId& id) override {
    std::unique_lock lock(mu_);
    charge_op();
    auto buf = acquire(id, lock, /*pin=*/false);
    charge_read(Medium::kDram, buf->size());
    return {buf->view(), buf};
  }

  void write_in_place(const ObjectId& id, std::uint64_t offset, ByteView bytes) override {
    std::unique_lock lock(mu_);
    check_range(id, find(id).length, offset, bytes.size());
    charge_op();
    auto buf = acquire(id, lock, /*pin=*/true);
    if (!bytes.empty()) std::memcpy(buf->data() + offset, bytes.data(), bytes.size());
    charge_write(Medium::kDram, bytes.size());
    release_pin(id, buf);
  }

  void modify_in_place(const ObjectId& id, std::uint64_t offset, std::uint64_t length,
                       const std::function<void(std::span<std::uint8_t>)>& fn) override {
    std::unique_lock lock(mu_);
    check_range(id, find(id).length, offset, length);
    charge_op();
    auto buf = acquire(id, lock, /*pin=*/true);
    lock.unlock();
    try {
      fn(buf->span().subspan(offset, length));
    } catch (...) {
      lock.lock();
      release_pin(id, buf);
      throw;
    }
    lock.lock();
    charge_read(Medium::kDram, length);
    charge_write(Medium::kDram, length);
    release_pin(id, buf);
  }

  void erase(const ObjectId& id) override {
    std::lock_guard lock(mu_);
    auto it = arena_.directory().find(id);
    if (it == arena_.directory().end()) throw not_found(id);
    if (auto c = cache_.find(id); c != cache_.end()) {
      occupancy_ -= c->second.buf->size();
      lru_.erase(c->second.pos);
      cache_.erase(c);
    }
    arena_.release(it->second);
    arena_.directory().erase(it);
  }

  void flush() override {
    std::lock_guard lock(mu_);
    for (auto& [id, entry] : cache_) {
      if (entry.dirty) write_back(id, entry);
    }
    arena_.persist_directory();
  }

  bool contains(const ObjectId& id) const override {
    std::lock_guard lock(mu_);
    return arena_.directory().contains(id);
  }

  std::optional<RegionRef> region(const ObjectId& id) const override {
    std::lock_guard lock(mu_);
    auto it = arena_.directory().find(id);
    if (it == arena_.directory().end()) return std::nullopt;
    return RegionRef{TierKind::kMemoryMode, it->second.offset, it->second.length};
  }

  std::vector<ObjectId> list() const override {
    std::lock_guard lock(mu_);
    std::vector<ObjectId> ids;
    for (const auto& [id, _] : arena_.directory()) ids.push_back(id);
    return ids;
  }

  std::uint64_t capacity_bytes() const override { return arena_.capacity(); }
  std::uint64_t used_bytes() const override {
    std::lock_guard lock(mu_);
    return arena_.used();
  }
  std::uint64_t cache_occupancy_bytes() const override {
    std::lock_guard lock(mu_);
    return occupancy_;
  }

 private:
  struct CacheEntry {
    std::shared_ptr<AlignedBytes> buf;
    std::list<ObjectId>::iterator pos;
    bool dirty = false;
    int pins = 0;
  };

  const Arena::Entry& find(const ObjectId& id) const {
    auto it = arena_.directory().find(id);
    if (it == arena_.directory().end()) throw not_found(id);
    return it->second;
  }

  // Returns the cached copy, filling it from the arena on a miss. Objects
  // larger than the whole cache are served from a transient copy.
  std::shared_ptr<AlignedBytes> acquire(const ObjectId& id,
                                        std::unique_lock<std::mutex>& lock, bool pin) {
    (void)lock;
    const Arena::Entry& e = find(id);
    if (auto c = cache_.find(id); c != cache_.end()) {
      count_hit();
      lru_.splice(lru_.begin(), lru_, c->second.pos);
      if (pin) ++c->second.pins;
      return c->second.buf;
    }
    count_miss();
    auto buf = std::make_shared<AlignedBytes>(e.length, e.offset % 8);
    if (e.length > 0) std::memcpy(buf->data(), arena_.data() + e.offset, e.length);
    charge_read(Medium::kNvm, e.length);
    charge_write(Medium::kDram, e.length);
    make_room(e.length);
    if (occupancy_ + e.length <= cache_capacity_) {
      lru_.push_front(id);
      CacheEntry entry{buf, lru_.begin(), false, pin ? 1 : 0};
      cache_.emplace(id, std::move(entry));
      occupancy_ += e.length;
    } else if (pin) {
      // Uncacheable object being written: track it as a pinned, over-budget
      // entry so the write still reaches the arena on unpin.
      transient_writes_.emplace(id, buf);
    }
    return buf;
  }

  void release_pin(const ObjectId& id, const std::shared_ptr<AlignedBytes>& buf) {
    if (auto c = cache_.find(id); c != cache_.end() && c->second.buf == buf) {
      c->second.dirty = true;
      --c->second.pins;
      return;
    }
    // Transient copy: write straight back.
    transient_writes_.erase(id);
    const Arena::Entry& e = find(id);
    std::memcpy(arena_.data() + e.offset, buf->data(), e.length);
    charge_write(Medium::kNvm, e.length);
  }

  void make_room(std::uint64_t need) {
    auto it = lru_.end();
    while (occupancy_ + need > cache_capacity_ && it != lru_.begin()) {
      --it;
      auto c = cache_.find(*it);
      if (c->second.pins > 0) continue;
      if (c->second.dirty) write_back(*it, c->second);
      occupancy_ -= c->second.buf->size();
      cache_.erase(c);
      it = lru_.erase(it);
    }
  }

  void write_back(const ObjectId& id, CacheEntry& entry) {
    const Arena::Entry& e = find(id);
    if (e.length > 0) std::memcpy(arena_.data() + e.offset, entry.buf->data(), e.length);
    charge_write(Medium::kNvm, e.length);
    entry.dirty = false;
  }

  mutable std::mutex mu_;
  Arena arena_;
  std::uint64_t cache_capacity_;
  std::uint64_t occupancy_ = 0;
  std::list<ObjectId> lru_;  // front = most recent
  std::unordered_map<ObjectId, CacheEntry> cache_;
  std::unordered_map<ObjectId, std::shared_ptr<AlignedBytes>> transient_writes_;
};

}  // namespace

std::unique_ptr<Tier> open_tier(TierKind kind, const ArenaConfig& config) {
  switch (kind) {
    case TierKind::kDram:
      if (config.capacity_bytes == 0) {
        throw Error(ErrorCode::kInvalidArgument, "dram capacity must be > 0");
      }
      return std::make_unique<DramTier>(config);
    case TierKind::kNvmDirect:
      return std::make_unique<NvmDirectTier>(config);
    case TierKind::kMemoryMode:
      return std::make_unique<MemoryModeTier>(config);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown tier kind");
}

}  // namespace aos
