#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "visgrade/error.hpp"
#include "visgrade/grader/grader.hpp"
#include "visgrade/interact/session.hpp"
#include "visgrade/text.hpp"

namespace visgrade::grader {

const std::string& error_probe_script() {
  static const std::string script = fmt::format(
      "<script>window.{0}=[];"
      "window.addEventListener('error',function(e){{window.{0}.push(String(e.message||e));}});"
      "window.addEventListener('unhandledrejection',function(e){{window.{0}.push('Unhandled rejection: '+String(e.reason));}});"
      "</script>",
      interact::kErrorProbeGlobal);
  return script;
}

std::string inject_probe(std::string html) {
  const auto lower = text::to_lower(html);
  for (const char* tag : {"<head", "<html"}) {
    auto at = lower.find(tag);
    // Skip lookalikes such as <header>.
    while (at != std::string::npos) {
      const char next = at + std::strlen(tag) < lower.size() ? lower[at + std::strlen(tag)] : '>';
      if (next == '>' || text::is_space(next)) break;
      at = lower.find(tag, at + 1);
    }
    if (at == std::string::npos) continue;
    const auto close = lower.find('>', at);
    if (close == std::string::npos) continue;
    html.insert(close + 1, error_probe_script());
    return html;
  }
  const auto doctype = lower.find("<!doctype");
  if (doctype != std::string::npos) {
    const auto close = lower.find('>', doctype);
    if (close != std::string::npos) {
      html.insert(close + 1, error_probe_script());
      return html;
    }
  }
  return error_probe_script() + html;
}

namespace {

std::string mime_type(const fs::path& p) {
  static const std::map<std::string, std::string> types = {
      {".html", "text/html; charset=utf-8"}, {".htm", "text/html; charset=utf-8"},
      {".js", "text/javascript"},            {".mjs", "text/javascript"},
      {".css", "text/css"},                  {".json", "application/json"},
      {".geojson", "application/json"},      {".topojson", "application/json"},
      {".csv", "text/csv"},                  {".tsv", "text/tab-separated-values"},
      {".svg", "image/svg+xml"},             {".png", "image/png"},
      {".jpg", "image/jpeg"},                {".jpeg", "image/jpeg"},
      {".txt", "text/plain"}};
  const auto it = types.find(text::to_lower(p.extension().string()));
  return it == types.end() ? "application/octet-stream" : it->second;
}

bool inside(const fs::path& root, const fs::path& candidate) {
  auto r = root.begin(), c = candidate.begin();
  for (; r != root.end(); ++r, ++c) {
    if (r->empty()) continue;
    if (c == candidate.end() || *r != *c) return false;
  }
  return true;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

struct StaticServer::Impl {
  std::vector<fs::path> roots;
  httplib::Server server;
  int port = 0;
  std::thread thread;
  mutable std::mutex mu;
  std::vector<std::string> log;

  void note(std::string line) {
    std::lock_guard lock(mu);
    log.push_back(std::move(line));
  }

  void handle(const httplib::Request& req, httplib::Response& res) {
    const std::string& path = req.path;
    std::string relative = path;
    while (!relative.empty() && relative.front() == '/') relative.erase(0, 1);
    bool escapes = path.find('\0') != std::string::npos;
    for (auto seg : text::split(relative, '/')) {
      for (auto part : text::split(seg, '\\')) escapes = escapes || part == "..";
    }
    if (!escapes) {
      for (const auto& root : roots) {
        std::error_code ec;
        const auto candidate = fs::weakly_canonical(root / fs::path(relative), ec);
        if (ec) continue;
        if (!inside(root, candidate)) {
          escapes = true;
          break;
        }
        if (fs::is_directory(candidate, ec)) continue;
        if (fs::is_regular_file(candidate, ec)) {
          auto body = read_file(candidate);
          const auto type = mime_type(candidate);
          if (type.starts_with("text/html")) body = inject_probe(std::move(body));
          res.set_content(body, type);
          return;
        }
      }
    }
    if (escapes) {
      note(fmt::format("{}: {}", PathTraversalAttempt("").kind(), path));
      res.status = 403;
      res.set_content("forbidden", "text/plain");
      return;
    }
    note(fmt::format("NotFound: {}", path));
    res.status = 404;
    res.set_content(fmt::format("<!DOCTYPE html><html><head><title>{} {}</title></head><body>Not found: {}</body></html>",
                                interact::kNotFoundMarker, path, path),
                    "text/html; charset=utf-8");
  }
};

StaticServer::StaticServer(fs::path root, std::optional<fs::path> shared_assets) : impl_(std::make_unique<Impl>()) {
  impl_->roots.push_back(fs::weakly_canonical(root));
  if (shared_assets) impl_->roots.push_back(fs::weakly_canonical(*shared_assets));
  impl_->server.Get(".*", [this](const httplib::Request& req, httplib::Response& res) { impl_->handle(req, res); });
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  if (impl_->port <= 0) throw PortExhausted("no loopback port available for the static server");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

StaticServer::~StaticServer() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string StaticServer::base_url() const { return fmt::format("http://127.0.0.1:{}", impl_->port); }

int StaticServer::port() const { return impl_->port; }

std::vector<std::string> StaticServer::log() const {
  std::lock_guard lock(impl_->mu);
  return impl_->log;
}

}  // namespace visgrade::grader
