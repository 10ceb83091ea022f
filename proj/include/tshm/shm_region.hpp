#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace tshm {

// A named POSIX shared-memory object mapped read-write into this process.
//
// Lengths are always rounded up to a multiple of 8 so 64-bit fields can be
// placed anywhere on an 8-byte boundary. Only the creator may resize the
// object; attachers must detach and re-attach to observe a new length.
// The mapping is released on destruction; the name persists until unlink().
class ShmRegion {
 public:
  enum class Mode { creator, attacher };

  // Exclusive create; the new region is zero-filled.
  static ShmRegion create(std::string name, std::size_t byte_len);
  static ShmRegion attach(std::string name);

  static void unlink(const std::string& name);
  static bool exists(const std::string& name);

  ShmRegion() = default;
  ShmRegion(ShmRegion&& other) noexcept;
  ShmRegion& operator=(ShmRegion&& other) noexcept;
  ShmRegion(const ShmRegion&) = delete;
  ShmRegion& operator=(const ShmRegion&) = delete;
  ~ShmRegion();

  // Extends the backing object and remaps. The base address may change.
  // Prior contents are preserved and the new tail reads as zero.
  void grow(std::size_t new_byte_len);
  // Truncates the backing object; bytes past the new length are discarded.
  void shrink(std::size_t new_byte_len);

  void detach();

  bool attached() const noexcept { return base_ != nullptr; }
  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return byte_len_; }
  Mode mode() const noexcept { return mode_; }

  std::byte* data() noexcept { return static_cast<std::byte*>(base_); }
  const std::byte* data() const noexcept {
    return static_cast<const std::byte*>(base_);
  }
  std::span<std::byte> bytes() noexcept { return {data(), byte_len_}; }
  std::span<const std::byte> bytes() const noexcept { return {data(), byte_len_}; }

  // Typed view of `count` elements of T starting at byte `offset`.
  template <class T>
  std::span<T> view(std::size_t offset, std::size_t count) {
    check_view(offset, count * sizeof(T), alignof(T));
    return {reinterpret_cast<T*>(data() + offset), count};
  }
  template <class T>
  std::span<const T> view(std::size_t offset, std::size_t count) const {
    check_view(offset, count * sizeof(T), alignof(T));
    return {reinterpret_cast<const T*>(data() + offset), count};
  }

 private:
  ShmRegion(std::string name, int fd, void* base, std::size_t len, Mode mode)
      : name_(std::move(name)), fd_(fd), base_(base), byte_len_(len), mode_(mode) {}

  void check_view(std::size_t offset, std::size_t bytes, std::size_t align) const;
  void remap(std::size_t new_len);
  void release() noexcept;

  std::string name_;
  int fd_ = -1;
  void* base_ = nullptr;
  std::size_t byte_len_ = 0;
  Mode mode_ = Mode::attacher;
};

// Leading slash, no other slash, at most 250 characters.
void validate_region_name(std::string_view name);

constexpr std::size_t round_up8(std::size_t n) noexcept { return (n + 7) & ~std::size_t{7}; }

}  // namespace tshm
