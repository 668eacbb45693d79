#pragma once

#include "topigen/documents.hpp"

#include <httplib.h>

#include <chrono>
#include <set>
#include <string>
#include <thread>

namespace topigen {

struct ServiceUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};

/// Accepts plain-http URLs of the form http://host[:port][/path]. The service
/// is expected to be Spotlight-compatible; TLS endpoints need a local proxy.
inline ServiceUrl parse_service_url(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind("https://", 0) == 0) {
    throw ConfigError("https service URLs are not supported (plain http only): " + url);
  }
  if (url.rfind(kScheme, 0) != 0) {
    throw ConfigError("service URL must start with http://: " + url);
  }
  std::string rest = url.substr(kScheme.size());
  ServiceUrl out;
  const std::size_t slash = rest.find('/');
  std::string authority = slash == std::string::npos ? rest : rest.substr(0, slash);
  out.path = slash == std::string::npos ? "/" : rest.substr(slash);
  const std::size_t colon = authority.find(':');
  if (colon == std::string::npos) {
    out.host = authority;
  } else {
    out.host = authority.substr(0, colon);
    try {
      out.port = std::stoi(authority.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("invalid port in service URL: " + url);
    }
  }
  if (out.host.empty()) throw ConfigError("missing host in service URL: " + url);
  if (out.port < 1 || out.port > 65535) {
    throw ConfigError("invalid port in service URL: " + url);
  }
  return out;
}

/// Client for a Spotlight-compatible annotation endpoint: form-encoded POST
/// of `text` and `confidence`, JSON response with a `Resources` array of
/// `@URI` entries. Instances hold no mutable state; concurrent use from
/// separate instances is fine.
class AnnotatorClient {
public:
  explicit AnnotatorClient(const std::string& service_url, double confidence = 0.5)
      : url_(parse_service_url(service_url)), confidence_(confidence) {
    if (!(confidence_ >= 0.0 && confidence_ <= 1.0)) {
      throw ConfigError("confidence must be in [0,1]");
    }
  }

  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{100};  // doubled per retry

  /// Sends one document for annotation. Retries transport-level failures
  /// (connection errors, non-2xx statuses) with exponential backoff; a 2xx
  /// response with an unparseable body is a ProtocolError and not retried.
  /// The returned topic set is deduplicated.
  AnnotatedDocument annotate(const RawDocument& doc) const {
    if (doc.text.empty()) {
      throw IntegrityError("cannot annotate empty text (doc '" + doc.doc_id + "')");
    }
    httplib::Client client(url_.host, url_.port);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(60, 0);
    const httplib::Headers headers{{"Accept", "application/json"}};
    const httplib::Params params{
        {"text", doc.text}, {"confidence", nlohmann::json(confidence_).dump()}};

    std::string last_failure;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(initial_backoff * (1 << (attempt - 1)));
      }
      httplib::Result res = client.Post(url_.path, headers, params);
      if (res && res->status >= 200 && res->status < 300) {
        return parse_response(doc, res->body);
      }
      last_failure = res ? "HTTP status " + std::to_string(res->status)
                         : std::string(httplib::to_string(res.error()));
    }
    throw TransportError("annotation request for doc '" + doc.doc_id + "' failed after " +
                         std::to_string(max_attempts) + " attempts: " + last_failure);
  }

private:
  AnnotatedDocument parse_response(const RawDocument& doc, const std::string& body) const {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ProtocolError("unparseable annotation response for doc '" + doc.doc_id + "'");
    }
    std::set<std::string> uris;
    if (j.contains("Resources")) {
      if (!j["Resources"].is_array()) {
        throw ProtocolError("annotation response field 'Resources' is not an array");
      }
      for (const auto& r : j["Resources"]) {
        // Entries without a usable @URI are tolerated and contribute nothing.
        if (r.is_object() && r.contains("@URI") && r["@URI"].is_string() &&
            !r["@URI"].get<std::string>().empty()) {
          uris.insert(r["@URI"].get<std::string>());
        }
      }
    }
    AnnotatedDocument out;
    out.doc_id = doc.doc_id;
    out.user_id = doc.user_id;
    out.topics.assign(uris.begin(), uris.end());
    return out;
  }

  ServiceUrl url_;
  double confidence_;
};

}  // namespace topigen
