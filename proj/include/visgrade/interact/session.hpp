#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "visgrade/checks/checks.hpp"
#include "visgrade/dom/document.hpp"
#include "visgrade/error.hpp"
#include "visgrade/interact/actions.hpp"

namespace visgrade::interact {

using Json = nlohmann::json;

inline constexpr const char* kDefaultEndpoint = "http://localhost:9515";
/// W3C key under which element references travel.
inline constexpr const char* kElementKey = "element-6066-11e4-a52e-4f735466cecf";
/// Set in the page title of the static server's not-found page.
inline constexpr const char* kNotFoundMarker = "visgrade: 404";
/// Global the static server's injected probe fills with uncaught errors.
inline constexpr const char* kErrorProbeGlobal = "__visgradeErrors";

/// Sequential HTTP+JSON transport to an automation server. Connection
/// failures raise ServerUnreachable; W3C error payloads raise ProtocolError
/// carrying the error code.
class WebDriverClient {
 public:
  explicit WebDriverClient(std::string endpoint, int timeout_ms = 60'000);
  ~WebDriverClient();
  WebDriverClient(const WebDriverClient&) = delete;
  WebDriverClient& operator=(const WebDriverClient&) = delete;

  /// Returns the response's "value" member.
  Json get(const std::string& path);
  Json post(const std::string& path, const Json& body);
  Json del(const std::string& path);

  const std::string& endpoint() const { return endpoint_; }

 private:
  Json handle(const std::string& method, const std::string& path, int status, const std::string& body);

  std::string endpoint_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Raised for W3C error responses; `code()` is the protocol error string
/// ("no such element", "timeout", ...).
class WireError : public ProtocolError {
 public:
  WireError(std::string code, const std::string& message)
      : ProtocolError(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct SessionOptions {
  int viewport_width = 1024;
  int viewport_height = 768;
  int implicit_wait_ms = 2000;
  int page_load_timeout_ms = 15000;
  std::optional<dom::Selector> ready_selector;
  bool headless = true;
};

struct Rect {
  double x = 0, y = 0, width = 0, height = 0;
};

class BrowserSession {
 public:
  /// Creates a session and loads `entry_url`. Throws ServerUnreachable,
  /// PageLoadTimeout, PageNotFound, JavascriptFatal, SessionFailure.
  static BrowserSession open(const std::string& endpoint, const std::string& entry_url, const SessionOptions& options);
  /// Session on a blank page. Throws ServerUnreachable, SessionFailure.
  static BrowserSession create(const std::string& endpoint, const SessionOptions& options);

  BrowserSession(BrowserSession&&) noexcept;
  BrowserSession& operator=(BrowserSession&&) noexcept;
  ~BrowserSession();

  const std::string& session_id() const { return session_id_; }
  const std::string& page_url() const { return page_url_; }
  const SessionOptions& options() const { return options_; }
  bool is_open() const { return open_; }

  /// Navigates and waits for readyState complete and the ready selector.
  void load(const std::string& url);
  void reload() { load(page_url_); }
  std::string title();

  /// Serialized document markup with computed styles attached.
  std::string serialize_dom();
  dom::Document snapshot() { return dom::parse_snapshot(serialize_dom()); }

  /// Element reference for the first match, waiting up to the implicit wait.
  std::optional<std::string> find_element(const dom::Selector& selector);
  Rect element_rect(const std::string& element);
  void click_element(const std::string& element);
  Json execute(const std::string& script, const Json& args = Json::array());
  void perform_actions(const Json& actions);
  void release_actions();

  /// Viewport PNG. Throws ScreenshotFailed.
  std::vector<std::uint8_t> capture_screenshot();

  /// Idempotent.
  void close();

 private:
  BrowserSession(std::unique_ptr<WebDriverClient> client, std::string id, SessionOptions options);
  std::string path(const std::string& suffix) const { return "/session/" + session_id_ + suffix; }
  void wait_until_ready();

  std::unique_ptr<WebDriverClient> client_;
  std::string session_id_;
  std::string page_url_;
  SessionOptions options_;
  bool open_ = false;
};

/// Script returning the document's outer markup with each element's
/// computed style in the data-visgrade-style attribute. Does not touch the
/// live DOM.
const std::string& serialization_script();

// ---- deltas ----

struct NodeChange {
  enum class Kind { attribute, style, text, added, removed };
  Kind kind = Kind::attribute;
  std::vector<std::size_t> path;  // child indices from the root
  std::string name;               // attribute or property; tag for added/removed
  std::optional<std::string> before;
  std::optional<std::string> after;
};

struct DomDelta {
  std::string before_markup;
  std::string after_markup;
  dom::Document before;
  dom::Document after;
  std::vector<NodeChange> changed_nodes;
};

/// Structural diff of two snapshots, pairing elements by child-index path.
std::vector<NodeChange> diff_documents(const dom::Document& before, const dom::Document& after);
DomDelta make_delta(std::string before_markup, std::string after_markup);

/// W3C action sequence for one step. `target` and `destination` are element
/// references; `travel` is the pointer displacement a drag_to must cover.
Json build_actions(const ActionStep& step, const std::optional<std::string>& target,
                   std::optional<std::pair<double, double>> travel = std::nullopt);

/// Runs the steps in order, one action sequence each, then waits
/// `settle_ms` and snapshots. Throws TargetNotFound, ChainInterrupted.
DomDelta run_chain(BrowserSession& session, const std::vector<ActionStep>& steps, int settle_ms);

/// Evaluates a relation on canonical values. Never throws for unresolvable
/// targets; those fail with an explanation.
checks::CheckResult assert_state(const DomDelta& delta, const StateAssertion& assertion);

/// PNG signature check plus IHDR dimensions.
std::optional<std::pair<std::uint32_t, std::uint32_t>> png_dimensions(const std::vector<std::uint8_t>& png);

std::vector<std::uint8_t> decode_base64(const std::string& text);

}  // namespace visgrade::interact
