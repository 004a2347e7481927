#include <chrono>
#include <thread>

#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <fmt/format.h>
#include <httplib.h>

#include "visgrade/error.hpp"
#include "visgrade/interact/session.hpp"

namespace visgrade::interact {

struct WebDriverClient::Impl {
  explicit Impl(const std::string& endpoint) : client(endpoint) {}
  httplib::Client client;
};

WebDriverClient::WebDriverClient(std::string endpoint, int timeout_ms)
    : endpoint_(std::move(endpoint)), impl_(std::make_unique<Impl>(endpoint_)) {
  if (!impl_->client.is_valid()) throw ServerUnreachable("invalid automation endpoint '" + endpoint_ + "'");
  impl_->client.set_connection_timeout(std::chrono::milliseconds(5000));
  impl_->client.set_read_timeout(std::chrono::milliseconds(timeout_ms));
  impl_->client.set_write_timeout(std::chrono::milliseconds(timeout_ms));
}

WebDriverClient::~WebDriverClient() = default;

Json WebDriverClient::handle(const std::string& method, const std::string& path, int status, const std::string& body) {
  Json parsed;
  try {
    parsed = body.empty() ? Json::object() : Json::parse(body);
  } catch (const Json::parse_error&) {
    throw ProtocolError(fmt::format("{} {}: HTTP {} with a non-JSON body", method, path, status));
  }
  const Json value = parsed.is_object() && parsed.contains("value") ? parsed["value"] : Json();
  if (status >= 400 || (value.is_object() && value.contains("error"))) {
    const auto code = value.is_object() ? value.value("error", "unknown error") : "unknown error";
    const auto message = value.is_object() ? value.value("message", "") : "";
    throw WireError(code, message.empty() ? fmt::format("{} {} (HTTP {})", method, path, status) : message);
  }
  return value;
}

namespace {

[[noreturn]] void unreachable(const std::string& endpoint, httplib::Error error) {
  throw ServerUnreachable(fmt::format("automation server at {} is not reachable ({})", endpoint,
                                      httplib::to_string(error)));
}

}  // namespace

Json WebDriverClient::get(const std::string& path) {
  auto res = impl_->client.Get(path);
  if (!res) unreachable(endpoint_, res.error());
  return handle("GET", path, res->status, res->body);
}

Json WebDriverClient::post(const std::string& path, const Json& body) {
  auto res = impl_->client.Post(path, body.dump(), "application/json");
  if (!res) unreachable(endpoint_, res.error());
  return handle("POST", path, res->status, res->body);
}

Json WebDriverClient::del(const std::string& path) {
  auto res = impl_->client.Delete(path);
  if (!res) unreachable(endpoint_, res.error());
  return handle("DELETE", path, res->status, res->body);
}

// ---- session ----

BrowserSession::BrowserSession(std::unique_ptr<WebDriverClient> client, std::string id, SessionOptions options)
    : client_(std::move(client)), session_id_(std::move(id)), options_(std::move(options)), open_(true) {}

BrowserSession::BrowserSession(BrowserSession&& other) noexcept
    : client_(std::move(other.client_)),
      session_id_(std::move(other.session_id_)),
      page_url_(std::move(other.page_url_)),
      options_(std::move(other.options_)),
      open_(std::exchange(other.open_, false)) {}

BrowserSession& BrowserSession::operator=(BrowserSession&& other) noexcept {
  if (this != &other) {
    close();
    client_ = std::move(other.client_);
    session_id_ = std::move(other.session_id_);
    page_url_ = std::move(other.page_url_);
    options_ = std::move(other.options_);
    open_ = std::exchange(other.open_, false);
  }
  return *this;
}

BrowserSession::~BrowserSession() { close(); }

BrowserSession BrowserSession::open(const std::string& endpoint, const std::string& entry_url,
                                    const SessionOptions& options) {
  auto session = create(endpoint, options);
  session.load(entry_url);
  return session;
}

BrowserSession BrowserSession::create(const std::string& endpoint, const SessionOptions& options) {
  auto client = std::make_unique<WebDriverClient>(endpoint, options.page_load_timeout_ms + 30'000);
  Json args = Json::array({fmt::format("--window-size={},{}", options.viewport_width, options.viewport_height)});
  if (options.headless) args.push_back("--headless=new");
  const Json caps = {{"capabilities",
                      {{"alwaysMatch", {{"browserName", "chrome"}, {"goog:chromeOptions", {{"args", args}}}}}}}};
  Json created;
  try {
    created = client->post("/session", caps);
  } catch (const WireError& e) {
    throw SessionFailure(std::string("could not create a browser session: ") + e.what());
  }
  if (!created.is_object() || !created.contains("sessionId") || !created["sessionId"].is_string()) {
    throw SessionFailure("automation server returned no session id");
  }
  BrowserSession session(std::move(client), created["sessionId"].get<std::string>(), options);
  session.client_->post(session.path("/timeouts"), {{"implicit", options.implicit_wait_ms},
                                                    {"pageLoad", options.page_load_timeout_ms},
                                                    {"script", 30'000}});
  try {
    session.client_->post(session.path("/window/rect"),
                          {{"width", options.viewport_width}, {"height", options.viewport_height}});
  } catch (const WireError&) {
    // Headless drivers may refuse window management; the launch size stands.
  }
  return session;
}

void BrowserSession::load(const std::string& url) {
  page_url_ = url;
  try {
    client_->post(path("/url"), {{"url", url}});
  } catch (const WireError& e) {
    if (e.code() == "timeout") {
      throw PageLoadTimeout(fmt::format("{} did not load within {} s", url, options_.page_load_timeout_ms / 1000.0));
    }
    throw;
  }
  wait_until_ready();
}

void BrowserSession::wait_until_ready() {
  using Clock = std::chrono::steady_clock;
  const auto deadline = Clock::now() + std::chrono::milliseconds(options_.page_load_timeout_ms);
  while (execute("return document.readyState;") != "complete") {
    if (Clock::now() > deadline) {
      throw PageLoadTimeout(fmt::format("{} did not finish loading within {} s", page_url_,
                                        options_.page_load_timeout_ms / 1000.0));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  if (title().find(kNotFoundMarker) != std::string::npos) throw PageNotFound(page_url_ + " was not found");

  auto probe = [&] {
    const auto errors = execute(fmt::format("return window.{} || [];", kErrorProbeGlobal));
    if (errors.is_array() && !errors.empty()) {
      throw JavascriptFatal(errors[0].is_string() ? errors[0].get<std::string>() : errors[0].dump());
    }
  };
  probe();
  if (options_.ready_selector) {
    while (!find_element(*options_.ready_selector)) {
      if (Clock::now() > deadline) {
        probe();
        throw PageLoadTimeout(fmt::format("'{}' never appeared on {}", options_.ready_selector->expression(), page_url_));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    probe();
  }
}

std::string BrowserSession::title() {
  const auto v = client_->get(path("/title"));
  return v.is_string() ? v.get<std::string>() : "";
}

std::string BrowserSession::serialize_dom() {
  const auto v = execute(serialization_script());
  if (!v.is_string()) throw ProtocolError("DOM serialization returned no markup");
  return v.get<std::string>();
}

namespace {

// Browsers know no :nth(k); the resolver applies it between querySelectorAll
// segments so the page sees the same subset the snapshot selector engine does.
const std::string kResolverScript = R"~(/* visgrade-resolve */
const parts = arguments[0].split(/:nth\((\d+)\)/);
let scope = document, found = null;
for (let i = 0; i < parts.length; i += 2) {
  let seg = parts[i].trim();
  const nth = i + 1 < parts.length ? Number(parts[i + 1]) : null;
  let matches;
  if (seg === '') matches = scope === document ? [] : [scope];
  else matches = Array.from(scope.querySelectorAll(seg.startsWith('>') ? ':scope ' + seg : seg));
  if (nth !== null) matches = nth < matches.length ? [matches[nth]] : [];
  if (!matches.length) return null;
  found = matches[0];
  scope = found;
}
return found;
)~";

}  // namespace

std::optional<std::string> BrowserSession::find_element(const dom::Selector& selector) {
  if (selector.expression().find(":nth(") != std::string::npos) {
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(options_.implicit_wait_ms);
    for (;;) {
      const auto v = execute(kResolverScript, Json::array({selector.expression()}));
      if (v.is_object() && v.contains(kElementKey)) return v[kElementKey].get<std::string>();
      if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  }
  try {
    const auto v = client_->post(path("/element"), {{"using", "css selector"}, {"value", selector.expression()}});
    if (v.is_object() && v.contains(kElementKey)) return v[kElementKey].get<std::string>();
    throw ProtocolError("element lookup returned no reference");
  } catch (const WireError& e) {
    if (e.code() == "no such element") return std::nullopt;
    throw;
  }
}

Rect BrowserSession::element_rect(const std::string& element) {
  const auto v = client_->get(path("/element/" + element + "/rect"));
  return {v.value("x", 0.0), v.value("y", 0.0), v.value("width", 0.0), v.value("height", 0.0)};
}

void BrowserSession::click_element(const std::string& element) {
  client_->post(path("/element/" + element + "/click"), Json::object());
}

Json BrowserSession::execute(const std::string& script, const Json& args) {
  return client_->post(path("/execute/sync"), {{"script", script}, {"args", args}});
}

void BrowserSession::perform_actions(const Json& actions) { client_->post(path("/actions"), {{"actions", actions}}); }

void BrowserSession::release_actions() { client_->del(path("/actions")); }

std::vector<std::uint8_t> BrowserSession::capture_screenshot() {
  if (!open_) throw ScreenshotFailed("the browser session is closed");
  Json v;
  try {
    v = client_->get(path("/screenshot"));
  } catch (const ProtocolError& e) {
    throw ScreenshotFailed(e.what());
  }
  if (!v.is_string()) throw ScreenshotFailed("screenshot response carried no image data");
  std::vector<std::uint8_t> png;
  try {
    png = decode_base64(v.get<std::string>());
  } catch (const std::exception& e) {
    throw ScreenshotFailed(std::string("screenshot is not valid base64: ") + e.what());
  }
  if (!png_dimensions(png)) throw ScreenshotFailed("screenshot is not a PNG image");
  return png;
}

void BrowserSession::close() {
  if (!open_) return;
  open_ = false;
  try {
    client_->del("/session/" + session_id_);
  } catch (...) {
    // Teardown is best effort; the server reaps abandoned sessions.
  }
}

const std::string& serialization_script() {
  static const std::string script = R"~(
const props = ['fill', 'stroke', 'stroke-width', 'opacity', 'fill-opacity', 'display', 'visibility'];
const source = document.documentElement;
const copy = source.cloneNode(true);
const live = [source], cloned = [copy];
while (live.length) {
  const s = live.pop(), c = cloned.pop();
  const cs = window.getComputedStyle(s);
  c.setAttribute('data-visgrade-style', props.map(p => p + ':' + cs.getPropertyValue(p)).join(';'));
  if (s.tagName === 'INPUT' || s.tagName === 'SELECT' || s.tagName === 'TEXTAREA') c.setAttribute('value', s.value);
  for (let i = 0; i < s.children.length; i++) {
    live.push(s.children[i]);
    cloned.push(c.children[i]);
  }
}
return '<!DOCTYPE html>' + copy.outerHTML;
)~";
  return script;
}

std::optional<std::pair<std::uint32_t, std::uint32_t>> png_dimensions(const std::vector<std::uint8_t>& png) {
  static constexpr std::uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (png.size() < 24 || !std::equal(std::begin(kSignature), std::end(kSignature), png.begin())) return std::nullopt;
  if (std::string(png.begin() + 12, png.begin() + 16) != "IHDR") return std::nullopt;
  auto be32 = [&](std::size_t at) {
    return (std::uint32_t{png[at]} << 24) | (std::uint32_t{png[at + 1]} << 16) | (std::uint32_t{png[at + 2]} << 8) |
           std::uint32_t{png[at + 3]};
  };
  return std::pair{be32(16), be32(20)};
}

std::vector<std::uint8_t> decode_base64(const std::string& text) {
  using namespace boost::archive::iterators;
  using Decoder = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::string clean;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) clean += c;
  }
  if (clean.size() % 4 != 0) throw std::invalid_argument("length is not a multiple of 4");
  std::size_t padding = 0;
  while (!clean.empty() && clean.back() == '=') {
    clean.pop_back();
    ++padding;
  }
  if (padding > 2) throw std::invalid_argument("too much padding");
  clean.append(padding, 'A');
  try {
    std::vector<std::uint8_t> out(Decoder(clean.cbegin()), Decoder(clean.cend()));
    out.resize(out.size() - padding);
    return out;
  } catch (const boost::archive::iterators::dataflow_exception&) {
    throw std::invalid_argument("invalid base64 character");
  }
}

}  // namespace visgrade::interact
