#include <httplib.h>

#include "rfsynth/instruct/instruct.hpp"

namespace rfsynth::instruct {

HttpTextGenClient::HttpTextGenClient(ClientConfig cfg) : cfg_(std::move(cfg)) {}

nlohmann::json HttpTextGenClient::request_body(const Prompt& prompt, const std::string& model) {
  return {{"model", model},
          {"temperature", 0},
          {"messages",
           {{{"role", "system"}, {"content", prompt.system + "\n\nHidden context:\n" + prompt.hidden_context}},
            {{"role", "user"}, {"content", prompt.user}}}}};
}

Completion HttpTextGenClient::complete(const Prompt& prompt) {
  Completion c;
  const auto scheme = cfg_.base_url.find("://");
  if (cfg_.base_url.rfind("http://", 0) != 0) {
    c.error = "base URL must start with http://";
    return c;
  }
  const auto slash = cfg_.base_url.find('/', scheme + 3);
  const std::string host = cfg_.base_url.substr(0, slash);
  std::string path = slash == std::string::npos ? std::string() : cfg_.base_url.substr(slash);
  while (!path.empty() && path.back() == '/') path.pop_back();
  path += "/chat/completions";

  httplib::Client cli(host);
  const auto secs = static_cast<time_t>(cfg_.timeout_s);
  const auto usecs = static_cast<time_t>((cfg_.timeout_s - static_cast<double>(secs)) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);
  auto res = cli.Post(path, headers, request_body(prompt, cfg_.model).dump(), "application/json");
  if (!res) {
    c.error = httplib::to_string(res.error());
    return c;
  }
  if (res->status != 200) {
    c.error = "HTTP " + std::to_string(res->status);
    return c;
  }
  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || j["choices"].empty()) {
    c.error = "malformed completion response";
    return c;
  }
  const auto& msg = j["choices"][0]["message"];
  if (!msg.contains("content") || !msg["content"].is_string()) {
    c.error = "completion has no text content";
    return c;
  }
  c.ok = true;
  c.text = msg["content"].get<std::string>();
  return c;
}

}  // namespace rfsynth::instruct
