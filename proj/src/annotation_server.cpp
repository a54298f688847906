#include "udderid/annotation_server.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "udderid/error.hpp"

namespace udderid {

using Json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
  return {status, "application/json", Json{{"error", code}, {"message", message}}.dump()};
}

HttpResponse error_response(int status, const Error& e) { return error_response(status, to_string(e.code()), e.what()); }

constexpr std::string_view kFallbackPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>udderid annotation server</title></head>
<body>
<h1>udderid annotation server</h1>
<p>The annotation UI bundle is not installed. Start the server with <code>--ui-dir</code>
pointing at the built UI, or use the JSON API directly:</p>
<ul>
<li><code>GET /api/frames</code></li>
<li><code>GET /api/frames/{id}/image</code></li>
<li><code>GET /api/frames/{id}/annotation</code></li>
<li><code>PUT /api/frames/{id}/annotation</code></li>
</ul>
</body></html>
)";

void apply(const HttpResponse& r, httplib::Response& res) {
  res.status = r.status;
  res.set_content(r.body, r.content_type.c_str());
}

}  // namespace

AnnotationService::AnnotationService(Manifest manifest) : manifest_(std::move(manifest)) {}

const ManifestEntry* AnnotationService::find(std::string_view id) const {
  std::size_t index = 0;
  const auto [end, ec] = std::from_chars(id.data(), id.data() + id.size(), index);
  if (ec != std::errc() || end != id.data() + id.size() || index >= manifest_.entries.size()) return nullptr;
  return &manifest_.entries[index];
}

HttpResponse AnnotationService::list_frames() const {
  Json frames = Json::array();
  for (std::size_t i = 0; i < manifest_.entries.size(); ++i) {
    const ManifestEntry& e = manifest_.entries[i];
    std::error_code ec;
    frames.push_back({{"id", std::to_string(i)},
                      {"cow_id", e.cow_id},
                      {"collection", manifest_.collection},
                      {"day", e.day},
                      {"has_image", e.image.has_value()},
                      {"annotated", fs::is_regular_file(e.annotation, ec)}});
  }
  return {200, "application/json", frames.dump()};
}

HttpResponse AnnotationService::frame_image(std::string_view id) const {
  const ManifestEntry* e = find(id);
  if (!e) return error_response(404, "unknown-frame", "no frame " + std::string(id));
  if (!e->image) return error_response(404, "no-image", "frame " + std::string(id) + " has no image");
  try {
    const std::vector<std::uint8_t> png = encode_png(preprocess_frame(*e));
    return {200, "image/png", std::string(png.begin(), png.end())};
  } catch (const Error& err) {
    return error_response(500, err);
  }
}

HttpResponse AnnotationService::get_annotation(std::string_view id) const {
  const ManifestEntry* e = find(id);
  if (!e) return error_response(404, "unknown-frame", "no frame " + std::string(id));
  std::error_code ec;
  if (!fs::is_regular_file(e->annotation, ec)) {
    return error_response(404, "not-annotated", "frame " + std::string(id) + " has no annotation yet");
  }
  try {
    const std::lock_guard lock(write_mutex_);
    return {200, "application/json", annotation_json(load_annotation(e->annotation))};
  } catch (const Error& err) {
    return error_response(500, err);
  }
}

HttpResponse AnnotationService::put_annotation(std::string_view id, std::string_view body) {
  const ManifestEntry* e = find(id);
  if (!e) return error_response(404, "unknown-frame", "no frame " + std::string(id));
  UdderAnnotation ann;
  try {
    ann = parse_annotation(body);
  } catch (const Error& err) {
    return error_response(400, err);
  }
  try {
    const std::lock_guard lock(write_mutex_);
    save_annotation(ann, e->annotation);
  } catch (const Error& err) {
    return error_response(500, err);
  }
  return {200, "application/json", annotation_json(ann)};
}

struct AnnotationServer::Impl {
  httplib::Server server;
};

AnnotationServer::AnnotationServer(AnnotationService& service, std::optional<fs::path> ui_dir)
    : impl_(std::make_unique<Impl>()) {
  httplib::Server& s = impl_->server;
  s.Get("/api/frames", [&service](const httplib::Request&, httplib::Response& res) { apply(service.list_frames(), res); });
  s.Get(R"(/api/frames/([^/]+)/image)", [&service](const httplib::Request& req, httplib::Response& res) {
    apply(service.frame_image(req.matches[1].str()), res);
  });
  s.Get(R"(/api/frames/([^/]+)/annotation)", [&service](const httplib::Request& req, httplib::Response& res) {
    apply(service.get_annotation(req.matches[1].str()), res);
  });
  s.Put(R"(/api/frames/([^/]+)/annotation)", [&service](const httplib::Request& req, httplib::Response& res) {
    apply(service.put_annotation(req.matches[1].str(), req.body), res);
  });

  if (ui_dir && fs::is_directory(*ui_dir)) {
    s.set_mount_point("/", ui_dir->string());
  } else {
    s.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(std::string(kFallbackPage), "text/html; charset=utf-8");
    });
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void AnnotationServer::listen() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace udderid
