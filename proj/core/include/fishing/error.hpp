#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fishing {

enum class ErrorCode { validation, not_found, conflict, internal };

std::string_view to_string(ErrorCode code);

/// Error raised by every fishing module. The code maps one-to-one onto the
/// HTTP status used by the service (400/404/409/500) and the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::map<std::string, std::string> detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::map<std::string, std::string>& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::map<std::string, std::string> detail_;
};

[[noreturn]] inline void fail_validation(const std::string& message,
                                         std::map<std::string, std::string> detail = {}) {
  throw Error(ErrorCode::validation, message, std::move(detail));
}

[[noreturn]] inline void fail_not_found(const std::string& message,
                                        std::map<std::string, std::string> detail = {}) {
  throw Error(ErrorCode::not_found, message, std::move(detail));
}

}  // namespace fishing
