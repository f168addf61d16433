#pragma once

#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "previz/agents.hpp"

// Backend implementations. ScriptedBackend answers from canned fixture
// responses and falls back to a deterministic rule table that synthesizes
// valid wire JSON from the prompt context, which keeps the whole pipeline
// runnable offline and byte-reproducible. ReplayBackend replays a recorded
// session; RecordingBackend captures one.
namespace previz::agents {

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string lower(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

}  // namespace detail

class ScriptedBackend : public AgentBackend {
 public:
  ScriptedBackend() = default;

  // fixture: {"responses": {schema_id: [raw, ...]}, "fallback_to_rules": bool}
  explicit ScriptedBackend(const json& fixture) {
    if (fixture.contains("fallback_to_rules"))
      fallback_to_rules_ = fixture.at("fallback_to_rules").get<bool>();
    if (fixture.contains("responses"))
      for (const auto& [schema, list] : fixture.at("responses").items())
        for (const auto& item : list)
          queues_[schema].push_back(item.is_string() ? item.get<std::string>() : item.dump());
  }

  std::string complete(const Role& role, const Prompt& prompt,
                       const std::string& schema_id) override {
    auto it = queues_.find(schema_id);
    if (it != queues_.end() && !it->second.empty()) {
      std::string raw = it->second.front();
      it->second.pop_front();
      return raw;
    }
    if (!fallback_to_rules_)
      throw BackendError("scripted backend has no fixture response for schema '" + schema_id +
                         "'");
    return rule_response(role, prompt, schema_id);
  }

 private:
  std::map<std::string, std::deque<std::string>> queues_;
  bool fallback_to_rules_ = true;

  static std::string rule_response(const Role& role, const Prompt& prompt,
                                   const std::string& schema_id) {
    const json& ctx = prompt.context;
    if (schema_id == "profiles") return rule_profiles(ctx);
    if (schema_id == "acts") return rule_acts(ctx);
    if (schema_id == "act_clips") return rule_act_clips(ctx);
    if (schema_id == "feedback")
      return json{{"feedback", "Keep the beats tight and the intent readable."}}.dump();
    if (schema_id == "judgment") return json{{"approved", true}, {"feedback", "Approved."}}.dump();
    if (schema_id == "critique")
      return json{{"critique", "Consider coverage and subject separation."}}.dump();
    if (schema_id == "blocking") return rule_blocking(ctx);
    if (schema_id == "motions") return rule_motions(ctx);
    if (schema_id == "camera_proposal") return rule_camera_proposal(ctx);
    if (schema_id == "camera_choice") return rule_camera_choice(ctx);
    if (schema_id == "ornaments")
      return json{{"suggestions", {"plant", "lamp", "book"}}}.dump();
    (void)role;
    throw BackendError("scripted backend: no rule for schema '" + schema_id + "'");
  }

  static std::string rule_profiles(const json& ctx) {
    static const char* kNames[] = {"Ava", "Ben", "Cora", "Dev"};
    static const char* kJobs[] = {"archivist", "engineer", "chef", "pilot"};
    static const char* kGenders[] = {"female", "male", "other", "female"};
    std::string idea = ctx.value("idea", "");
    int count = 2 + static_cast<int>(detail::fnv1a(idea) % 2);
    json profiles = json::array();
    for (int i = 0; i < count; ++i) {
      profiles.push_back({{"name", kNames[i]},
                          {"age", 28 + 6 * i},
                          {"gender", kGenders[i]},
                          {"occupation", kJobs[i]},
                          {"traits", std::string("measured, curious, habit ") + kNames[i]},
                          {"speaking_style", "plain sentences, rarely raises the voice"}});
    }
    return json{{"profiles", profiles}}.dump();
  }

  static std::string rule_acts(const json& ctx) {
    json names = ctx.value("profiles", json::array());
    json acts = json::array();
    for (int i = 1; i <= 3; ++i) {
      acts.push_back({{"index", i},
                      {"sub_topic", "Part " + std::to_string(i)},
                      {"participants", names},
                      {"scene_description", ctx.value("idea", "")},
                      {"plot", "The characters work through part " + std::to_string(i) + "."},
                      {"dialogue_goal", "Advance part " + std::to_string(i) + "."}});
    }
    return json{{"acts", acts}}.dump();
  }

  static std::string rule_act_clips(const json& ctx) {
    if (ctx.contains("draft")) return ctx.at("draft").dump();  // revision echoes the draft
    std::vector<std::string> participants;
    for (const auto& p : ctx.at("act").at("participants")) participants.push_back(p);
    std::string topic = ctx.at("act").value("sub_topic", "the plan");
    json clips = json::array();
    for (int i = 1; i <= 2; ++i) {
      json lines = json::array();
      const std::string& a = participants[(i - 1) % participants.size()];
      const std::string& b = participants[i % participants.size()];
      lines.push_back({{"speaker", a}, {"text", "Let's settle " + topic + " before we move."}});
      lines.push_back({{"speaker", b}, {"text", "Agreed. Walk me through it once more."}});
      clips.push_back({{"index", i}, {"lines", lines}});
    }
    return json{{"clips", clips}}.dump();
  }

  static std::string rule_blocking(const json& ctx) {
    if (ctx.contains("draft")) return ctx.at("draft").dump();  // revision echoes the draft
    std::vector<std::string> characters;
    for (const auto& c : ctx.at("characters")) characters.push_back(c);
    const json& regions = ctx.at("regions");
    const json& seats = ctx.value("seats", json::array());
    const json& prev = ctx.value("prev_end", json::object());
    long clip_index = ctx.at("clip").value("index", 1);

    // endpoint helpers emit parcel/seat references so positions snap exactly
    auto region_ref = [&](std::size_t k) {
      std::size_t stride = std::max<std::size_t>(1, regions.size() / std::max<std::size_t>(
                                                                        characters.size(), 1));
      const json& r = regions[(k * stride) % regions.size()];
      return json{{"parcel", r.at("parcel")}, {"center", r.at("center")}};
    };

    json list = json::array();
    // first pass: decide endpoint anchors so facings can point at partners
    std::vector<json> starts(characters.size()), ends(characters.size());
    std::vector<Vec2> start_pos(characters.size()), end_pos(characters.size());
    for (std::size_t k = 0; k < characters.size(); ++k) {
      const std::string& name = characters[k];
      bool sits = k == 0 && !seats.empty() && characters.size() >= 2;
      if (prev.contains(name)) {
        const json& pe = prev.at(name);
        starts[k] = {{"kind", "pos"},
                     {"state", pe.at("state")},
                     {"pos", pe.at("pos")}};
        start_pos[k] = {pe.at("pos")[0].get<double>(), pe.at("pos")[1].get<double>()};
      } else if (sits) {
        starts[k] = {{"kind", "seat"}, {"state", "sitting"}, {"seat", seats[0].at("id")}};
        start_pos[k] = {seats[0].at("pos")[0].get<double>(), seats[0].at("pos")[1].get<double>()};
      } else if (!regions.empty()) {
        json r = region_ref(k);
        starts[k] = {{"kind", "parcel"}, {"state", "standing"}, {"parcel", r.at("parcel")}};
        start_pos[k] = {r.at("center")[0].get<double>(), r.at("center")[1].get<double>()};
      } else {
        starts[k] = {{"kind", "pos"}, {"state", "standing"}, {"pos", {0.0, 0.0}}};
      }
      // odd clips walk the second character to a fresh region
      if (clip_index % 2 == 1 && k == 1 && regions.size() > characters.size()) {
        const json& r = regions[(characters.size() * std::max<std::size_t>(
                                    1, regions.size() / characters.size())) %
                                regions.size()];
        ends[k] = {{"kind", "parcel"}, {"state", "standing"}, {"parcel", r.at("parcel")}};
        end_pos[k] = {r.at("center")[0].get<double>(), r.at("center")[1].get<double>()};
      } else {
        ends[k] = starts[k];
        end_pos[k] = start_pos[k];
      }
    }

    for (std::size_t k = 0; k < characters.size(); ++k) {
      std::size_t partner = characters.size() > 1 ? (k == 0 ? 1 : 0) : k;
      auto bearing = [&](Vec2 from, Vec2 to) {
        if (characters.size() <= 1) return 0.0;
        return normalize_yaw(std::atan2(to.y - from.y, to.x - from.x));
      };
      json rec{{"character", characters[k]},
               {"start_state", starts[k].at("state")},
               {"end_state", ends[k].at("state")},
               {"start_facing", bearing(start_pos[k], start_pos[partner])},
               {"end_facing", bearing(end_pos[k], end_pos[partner])}};
      for (const char* which : {"start", "end"}) {
        const json& ep = std::string(which) == "start" ? starts[k] : ends[k];
        std::string kind = ep.at("kind");
        if (kind == "seat")
          rec[std::string(which) + "_seat"] = ep.at("seat");
        else if (kind == "parcel")
          rec[std::string(which) + "_parcel"] = ep.at("parcel");
        else
          rec[std::string(which) + "_pos"] = ep.at("pos");
      }
      list.push_back(rec);
    }
    return json{{"behaviours", list}}.dump();
  }

  static std::string rule_motions(const json& ctx) {
    if (ctx.contains("draft")) return ctx.at("draft").dump();
    const json& catalog = ctx.at("catalog");
    std::set<std::string> speakers;
    for (const auto& s : ctx.value("speakers", json::array()))
      speakers.insert(s.get<std::string>());

    auto pick = [&](const std::string& state, bool talking) -> long {
      long tagged = -1, plain = -1;
      for (const auto& entry : catalog) {
        bool compat = false;
        for (const auto& s : entry.at("states")) compat |= (s.get<std::string>() == state);
        if (!compat) continue;
        long id = entry.at("id").get<long>();
        if (plain < 0 || id < plain) plain = id;
        std::string text = detail::lower(entry.value("name", "") + " " + entry.value("tags", ""));
        bool match = talking ? text.find("talk") != std::string::npos
                             : text.find("idle") != std::string::npos;
        if (match && (tagged < 0 || id < tagged)) tagged = id;
      }
      return tagged >= 0 ? tagged : plain;
    };

    json out = json::array();
    for (const auto& [name, b] : ctx.at("behaviours").items()) {
      std::string state = b.at("start_state").get<std::string>();
      long id = pick(state, speakers.count(name) > 0 && state == "standing");
      out.push_back({{"character", name}, {"motion_id", id}});
    }
    return json{{"motions", out}}.dump();
  }

  static std::string rule_camera_proposal(const json& ctx) {
    std::size_t subjects = ctx.at("subjects").size();
    int proposer = ctx.value("proposer", 1);
    json proposal;
    if (subjects == 1) {
      proposal = proposer == 1
                     ? json{{"type", "single_static"},
                            {"params", {{"shot_size", "MS"}, {"angle", "eye"}}}}
                     : json{{"type", "push_in"},
                            {"params",
                             {{"shot_size", "MS"}, {"angle", "eye"}, {"ease", "ease_in_out"}}}};
    } else if (subjects == 2) {
      proposal = proposer == 1
                     ? json{{"type", "two_static"},
                            {"params",
                             {{"relation", "equal"},
                              {"framing", "two_shot"},
                              {"shot_size", "MS"},
                              {"angle", "eye"}}}}
                     : json{{"type", "two_static"},
                            {"params",
                             {{"relation", "equal"},
                              {"framing", "OTS_pair"},
                              {"shot_size", "MCU"},
                              {"angle", "eye"}}}};
    } else {
      proposal = json{{"type", "group_static"},
                      {"params", {{"shot_size", "LS"}, {"angle", proposer == 1 ? "eye" : "high"}}}};
    }
    proposal["rationale"] = "Covers the subjects with a conventional framing.";
    return proposal.dump();
  }

  static std::string rule_camera_choice(const json& ctx) {
    json choice = ctx.at("proposal_1");
    choice["rationale"] = "First proposal frames the moment adequately.";
    return choice.dump();
  }
};

// Replays a recorded session; responses must be consumed in recording order.
class ReplayBackend : public AgentBackend {
 public:
  // recording: [{"schema": id, "response": raw}, ...]
  explicit ReplayBackend(const json& recording) {
    for (const auto& item : recording)
      entries_.push_back({item.at("schema").get<std::string>(),
                          item.at("response").get<std::string>()});
  }

  std::string complete(const Role&, const Prompt&, const std::string& schema_id) override {
    if (next_ >= entries_.size())
      throw BackendError("replay backend: recording exhausted at schema '" + schema_id + "'");
    const auto& [schema, response] = entries_[next_];
    if (schema != schema_id)
      throw BackendError("replay backend: expected schema '" + schema + "', got '" + schema_id +
                         "'");
    ++next_;
    return response;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::size_t next_ = 0;
};

// Captures (schema, response) pairs from an inner backend for later replay.
class RecordingBackend : public AgentBackend {
 public:
  explicit RecordingBackend(AgentBackend& inner) : inner_(inner) {}

  std::string complete(const Role& role, const Prompt& prompt,
                       const std::string& schema_id) override {
    std::string response = inner_.complete(role, prompt, schema_id);
    recording_.push_back({{"schema", schema_id}, {"response", response}});
    return response;
  }

  const json& recording() const { return recording_; }

 private:
  AgentBackend& inner_;
  json recording_ = json::array();
};

// Serializing gate for backends that are not safe for concurrent use.
class SerializedBackend : public AgentBackend {
 public:
  explicit SerializedBackend(AgentBackend& inner) : inner_(inner) {}

  std::string complete(const Role& role, const Prompt& prompt,
                       const std::string& schema_id) override {
    std::lock_guard<std::mutex> lock(mutex_);
    return inner_.complete(role, prompt, schema_id);
  }

 private:
  AgentBackend& inner_;
  std::mutex mutex_;
};

}  // namespace previz::agents
