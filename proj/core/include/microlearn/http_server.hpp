#pragma once

// /v1 HTTP API over a LearningService. Request identity comes from headers:
//   X-Learner-Identity  real learner identity, pseudonymized at the edge
//   X-Role              "instructor" (reports, export, any learner's views)
//                       or "admin" (also /v1/admin/*)
// Errors are {"error":{"code":...,"message":...}} with a 4xx status, or 503
// when the event log cannot be written.

#include "microlearn/learning_service.hpp"

#include <memory>
#include <string>

namespace microlearn {

class HttpServer {
 public:
  explicit HttpServer(LearningService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds without serving; port 0 picks a free port. Returns the bound port,
  /// or -1 on failure.
  int bind(const std::string& host, int port);

  /// Serves until stop(); in-flight requests finish before it returns.
  bool run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace microlearn
