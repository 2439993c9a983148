// Minimal result type for operations whose failure is data-dependent rather
// than a programming error (unparseable line, out-of-range observation).
// Precondition violations throw instead.
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace padland {

struct Error {
  std::string message;
};

template <typename T>
class Result {
 public:
  Result(T value) : storage_(std::move(value)) {}
  Result(Error error) : storage_(std::move(error)) {}

  static Result failure(std::string message) { return Result(Error{std::move(message)}); }

  bool ok() const { return std::holds_alternative<T>(storage_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::runtime_error("Result::value on error: " + error().message);
    return std::get<T>(storage_);
  }
  T& value() & {
    if (!ok()) throw std::runtime_error("Result::value on error: " + error().message);
    return std::get<T>(storage_);
  }
  T&& value() && {
    if (!ok()) throw std::runtime_error("Result::value on error: " + error().message);
    return std::get<T>(std::move(storage_));
  }

  const Error& error() const {
    return std::get<Error>(storage_);
  }

 private:
  std::variant<T, Error> storage_;
};

}  // namespace padland
