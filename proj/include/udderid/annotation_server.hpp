#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "udderid/dataset_io.hpp"

namespace udderid {

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Request handling behind the annotation HTTP API, independent of the
/// transport. Frame ids are the entry indices of the manifest ("0", "1", ...).
/// Error bodies are `{"error": <code>, "message": <text>}`.
class AnnotationService {
 public:
  explicit AnnotationService(Manifest manifest);

  const Manifest& manifest() const { return manifest_; }

  /// GET /api/frames
  HttpResponse list_frames() const;
  /// GET /api/frames/{id}/image: the preprocessed frame as PNG.
  HttpResponse frame_image(std::string_view id) const;
  /// GET /api/frames/{id}/annotation
  HttpResponse get_annotation(std::string_view id) const;
  /// PUT /api/frames/{id}/annotation: validated, then written atomically.
  /// Concurrent writers to one frame resolve last-write-wins.
  HttpResponse put_annotation(std::string_view id, std::string_view body);

 private:
  const ManifestEntry* find(std::string_view id) const;

  Manifest manifest_;
  mutable std::mutex write_mutex_;
};

/// HTTP front end for AnnotationService. GET / serves `ui_dir` (the
/// annotation UI bundle) when given, otherwise a minimal built-in page.
class AnnotationServer {
 public:
  AnnotationServer(AnnotationService& service, std::optional<std::filesystem::path> ui_dir = std::nullopt);
  ~AnnotationServer();
  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds to `host:port`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace udderid
