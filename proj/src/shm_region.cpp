#include "tshm/shm_region.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <utility>

#include "tshm/error.hpp"

namespace tshm {

namespace {

[[noreturn]] void throw_errno(const std::string& what, int err) {
  Errc code = Errc::system;
  if (err == EEXIST) code = Errc::already_exists;
  if (err == ENOENT) code = Errc::not_found;
  throw Error(code, what + ": " + std::strerror(err));
}

void* map_fd(int fd, std::size_t len) {
  void* p = ::mmap(nullptr, len, PROT_READ | PROT_WRITE, MAP_SHARED, fd, 0);
  return p == MAP_FAILED ? nullptr : p;
}

}  // namespace

void validate_region_name(std::string_view name) {
  if (name.size() < 2 || name.size() > 250 || name.front() != '/' ||
      name.find('/', 1) != std::string_view::npos)
    throw Error(Errc::invalid_argument,
                "invalid region name '" + std::string(name) + "'");
}

ShmRegion ShmRegion::create(std::string name, std::size_t byte_len) {
  validate_region_name(name);
  if (byte_len == 0)
    throw Error(Errc::invalid_argument, "region length must be positive");
  const std::size_t len = round_up8(byte_len);

  int fd = ::shm_open(name.c_str(), O_CREAT | O_EXCL | O_RDWR, 0600);
  if (fd < 0) throw_errno("shm_open(create " + name + ")", errno);
  if (::ftruncate(fd, static_cast<off_t>(len)) != 0) {
    int err = errno;
    ::close(fd);
    ::shm_unlink(name.c_str());
    throw_errno("ftruncate(" + name + ")", err);
  }
  void* base = map_fd(fd, len);
  if (!base) {
    int err = errno;
    ::close(fd);
    ::shm_unlink(name.c_str());
    throw_errno("mmap(" + name + ")", err);
  }
  return ShmRegion(std::move(name), fd, base, len, Mode::creator);
}

ShmRegion ShmRegion::attach(std::string name) {
  validate_region_name(name);
  int fd = ::shm_open(name.c_str(), O_RDWR, 0);
  if (fd < 0) throw_errno("shm_open(attach " + name + ")", errno);
  struct stat st {};
  if (::fstat(fd, &st) != 0) {
    int err = errno;
    ::close(fd);
    throw_errno("fstat(" + name + ")", err);
  }
  const auto len = static_cast<std::size_t>(st.st_size);
  if (len == 0) {
    ::close(fd);
    throw Error(Errc::not_found, "region " + name + " has no storage yet");
  }
  void* base = map_fd(fd, len);
  if (!base) {
    int err = errno;
    ::close(fd);
    throw_errno("mmap(" + name + ")", err);
  }
  return ShmRegion(std::move(name), fd, base, len, Mode::attacher);
}

void ShmRegion::unlink(const std::string& name) {
  validate_region_name(name);
  if (::shm_unlink(name.c_str()) != 0)
    throw_errno("shm_unlink(" + name + ")", errno);
}

bool ShmRegion::exists(const std::string& name) {
  validate_region_name(name);
  int fd = ::shm_open(name.c_str(), O_RDONLY, 0);
  if (fd < 0) return false;
  ::close(fd);
  return true;
}

ShmRegion::ShmRegion(ShmRegion&& other) noexcept
    : name_(std::move(other.name_)),
      fd_(std::exchange(other.fd_, -1)),
      base_(std::exchange(other.base_, nullptr)),
      byte_len_(std::exchange(other.byte_len_, 0)),
      mode_(other.mode_) {}

ShmRegion& ShmRegion::operator=(ShmRegion&& other) noexcept {
  if (this != &other) {
    release();
    name_ = std::move(other.name_);
    fd_ = std::exchange(other.fd_, -1);
    base_ = std::exchange(other.base_, nullptr);
    byte_len_ = std::exchange(other.byte_len_, 0);
    mode_ = other.mode_;
  }
  return *this;
}

ShmRegion::~ShmRegion() { release(); }

void ShmRegion::release() noexcept {
  if (base_) ::munmap(base_, byte_len_);
  if (fd_ >= 0) ::close(fd_);
  base_ = nullptr;
  fd_ = -1;
}

void ShmRegion::detach() {
  if (!attached())
    throw Error(Errc::protocol, "region '" + name_ + "' is already detached");
  release();
}

void ShmRegion::remap(std::size_t new_len) {
#ifdef __linux__
  void* p = ::mremap(base_, byte_len_, new_len, MREMAP_MAYMOVE);
  if (p == MAP_FAILED) throw_errno("mremap(" + name_ + ")", errno);
  base_ = p;
#else
  void* p = map_fd(fd_, new_len);
  if (!p) throw_errno("mmap(" + name_ + ")", errno);
  ::munmap(base_, byte_len_);
  base_ = p;
#endif
  byte_len_ = new_len;
}

void ShmRegion::grow(std::size_t new_byte_len) {
  if (!attached()) throw Error(Errc::protocol, "grow on a detached region");
  if (mode_ != Mode::creator)
    throw Error(Errc::protocol, "only the creator may grow '" + name_ + "'");
  const std::size_t len = round_up8(new_byte_len);
  if (len <= byte_len_)
    throw Error(Errc::invalid_argument,
                "grow to " + std::to_string(new_byte_len) +
                    " bytes does not exceed current " + std::to_string(byte_len_));
  if (::ftruncate(fd_, static_cast<off_t>(len)) != 0)
    throw_errno("ftruncate(" + name_ + ")", errno);
  remap(len);
}

void ShmRegion::shrink(std::size_t new_byte_len) {
  if (!attached()) throw Error(Errc::protocol, "shrink on a detached region");
  if (mode_ != Mode::creator)
    throw Error(Errc::protocol, "only the creator may shrink '" + name_ + "'");
  const std::size_t len = round_up8(new_byte_len);
  if (len == 0 || len > byte_len_)
    throw Error(Errc::invalid_argument,
                "shrink target " + std::to_string(new_byte_len) + " is invalid");
  if (len == byte_len_) return;
  // Remap first so no live mapping ever extends past the end of the object.
  remap(len);
  if (::ftruncate(fd_, static_cast<off_t>(len)) != 0)
    throw_errno("ftruncate(" + name_ + ")", errno);
}

void ShmRegion::check_view(std::size_t offset, std::size_t bytes,
                           std::size_t align) const {
  if (!base_) throw Error(Errc::protocol, "view of a detached region");
  if (offset > byte_len_ || bytes > byte_len_ - offset)
    throw Error(Errc::out_of_bounds, "view exceeds region '" + name_ + "'");
  if ((reinterpret_cast<std::uintptr_t>(base_) + offset) % align != 0)
    throw Error(Errc::invalid_argument, "misaligned view");
}

}  // namespace tshm
