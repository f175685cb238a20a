#pragma once

#include <cassert>
#include <utility>
#include <variant>

namespace tracereason {

template <typename E>
struct Failure {
  E error;
};

template <typename E>
Failure(E) -> Failure<E>;

/// Either a value or an error. A stand-in for std::expected, which the
/// supported toolchains do not ship yet.
template <typename T, typename E>
class Result {
 public:
  Result(T value) : storage_(std::in_place_index<0>, std::move(value)) {}
  template <typename U>
  Result(Failure<U> failure) : storage_(std::in_place_index<1>, E(std::move(failure.error))) {}

  [[nodiscard]] bool ok() const noexcept { return storage_.index() == 0; }
  explicit operator bool() const noexcept { return ok(); }

  T& value() & {
    assert(ok());
    return std::get<0>(storage_);
  }
  const T& value() const& {
    assert(ok());
    return std::get<0>(storage_);
  }
  T&& value() && {
    assert(ok());
    return std::get<0>(std::move(storage_));
  }

  E& error() & {
    assert(!ok());
    return std::get<1>(storage_);
  }
  const E& error() const& {
    assert(!ok());
    return std::get<1>(storage_);
  }

  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }
  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }

 private:
  std::variant<T, E> storage_;
};

}  // namespace tracereason
