#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>

#include "previz/agents.hpp"

namespace previz::agents {

// Chat-completion endpoint client. Configuration comes from the environment:
//   PREVIZ_REMOTE_URL      base url, e.g. http://localhost:8080
//   PREVIZ_REMOTE_MODEL    model name
//   PREVIZ_REMOTE_API_KEY  bearer token (optional)
// Requests are single-line JSON; one network retry, 60 s timeout.
class RemoteBackend : public AgentBackend {
 public:
  static RemoteBackend from_env() {
    const char* url = std::getenv("PREVIZ_REMOTE_URL");
    const char* model = std::getenv("PREVIZ_REMOTE_MODEL");
    if (!url || !*url) throw ConfigError("PREVIZ_REMOTE_URL is not set");
    if (!model || !*model) throw ConfigError("PREVIZ_REMOTE_MODEL is not set");
    const char* key = std::getenv("PREVIZ_REMOTE_API_KEY");
    return RemoteBackend(url, model, key ? key : "");
  }

  RemoteBackend(std::string base_url, std::string model, std::string api_key = "")
      : base_url_(std::move(base_url)), model_(std::move(model)), api_key_(std::move(api_key)) {}

  std::string complete(const Role& role, const Prompt& prompt,
                       const std::string& schema_id) override {
    json body{
        {"model", model_},
        {"temperature", 0},
        {"messages",
         {{{"role", "system"}, {"content", system_message(role)}},
          {{"role", "user"},
           {"content", prompt.instructions + "\n\nContext:\n" + prompt.context.dump() +
                           "\n\nRespond with JSON matching schema '" + schema_id + "'."}}}}};
    std::string payload = body.dump();  // dump() emits no newlines

    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
      httplib::Client client(base_url_);
      client.set_connection_timeout(60, 0);
      client.set_read_timeout(60, 0);
      httplib::Headers headers;
      if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
      auto res = client.Post("/v1/chat/completions", headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "http status " + std::to_string(res->status) + ": " + res->body;
        continue;
      }
      json doc = json::parse(res->body, nullptr, false);
      if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty())
        throw BackendError("remote backend: malformed completion response");
      return doc["choices"][0]["message"]["content"].get<std::string>();
    }
    throw BackendError("remote backend: " + last_error);
  }

 private:
  static std::string system_message(const Role& role) {
    std::string msg = "You are the " + std::string(to_string(role.kind)) +
                      " in a film previsualization crew. Persona: " + role.persona + ".";
    if (role.character_binding) msg += " You voice the character " + *role.character_binding + ".";
    return msg;
  }

  std::string base_url_;
  std::string model_;
  std::string api_key_;
};

}  // namespace previz::agents
