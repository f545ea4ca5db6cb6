#include <httplib.h>

#include <cstdlib>
#include <regex>

#include "mtdata/error.h"
#include "mtdata/eval/judge.h"

namespace mtdata::eval {

HttpChatTransport::HttpChatTransport(const JudgeConfig& config) : timeout_(config.timeout) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config.endpoint, m, kUrl)) {
    throw UsageError("judge endpoint must be an http(s) URL, got '" + config.endpoint + "'");
  }
  base_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
  if (!config.api_key_env.empty()) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw AuthError("judge credential variable " + config.api_key_env + " is not set");
    }
    api_key_ = key;
  }
}

HttpResponse HttpChatTransport::post(const std::string& json_body) {
  httplib::Client client(base_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = client.Post(path_, headers, json_body, "application/json");
  if (!res) return HttpResponse{0, {}, "request failed: " + httplib::to_string(res.error())};
  return HttpResponse{res->status, res->body, {}};
}

}  // namespace mtdata::eval
