#pragma once

#include <array>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "previz/core.hpp"
#include "previz/prompts.hpp"

// Collaboration protocols over a pluggable agent backend: the
// discuss-revise-judge loop, the debate-judge-validation loop, and screenplay
// development. Backends receive a role, a structured prompt (instruction text
// plus a JSON context digest) and a schema id, and return raw text that is
// strictly parsed before use.
namespace previz::agents {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Roles and transcripts

enum class RoleKind { screenwriter, actor, director, cinematographer, scene_designer };

struct Role {
  RoleKind kind = RoleKind::screenwriter;
  std::string persona;
  std::optional<std::string> character_binding;  // actors only
};

inline Role make_role(RoleKind kind, std::string persona) {
  return {kind, std::move(persona), std::nullopt};
}

inline Role make_actor(const std::string& character) {
  return {RoleKind::actor, "actor voicing " + character, character};
}

inline std::vector<Violation> validate_role(const Role& r) {
  std::vector<Violation> out;
  if (r.kind == RoleKind::actor && !r.character_binding)
    out.push_back({"character_binding", "actor_bound", "actor role lacks a character binding"});
  if (r.kind != RoleKind::actor && r.character_binding)
    out.push_back({"character_binding", "actor_only", "non-actor role carries a binding"});
  return out;
}

inline const char* to_string(RoleKind k) {
  switch (k) {
    case RoleKind::screenwriter: return "screenwriter";
    case RoleKind::actor: return "actor";
    case RoleKind::director: return "director";
    case RoleKind::cinematographer: return "cinematographer";
    case RoleKind::scene_designer: return "scene_designer";
  }
  return "?";
}

enum class MessageKind { draft, feedback, revision, judgment, proposal, critique, validation_result };

inline const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::draft: return "draft";
    case MessageKind::feedback: return "feedback";
    case MessageKind::revision: return "revision";
    case MessageKind::judgment: return "judgment";
    case MessageKind::proposal: return "proposal";
    case MessageKind::critique: return "critique";
    case MessageKind::validation_result: return "validation_result";
  }
  return "?";
}

struct TranscriptEntry {
  int round = 0;
  RoleKind role = RoleKind::screenwriter;
  std::string role_name;
  MessageKind kind = MessageKind::draft;
  std::string payload;
};

struct Transcript {
  std::vector<TranscriptEntry> rounds;

  void append(int round, const Role& role, MessageKind kind, std::string payload) {
    if (!rounds.empty() && round < rounds.back().round)
      throw Error(ErrorCode::internal, "transcript rounds must be non-decreasing");
    if (kind == MessageKind::judgment && role.kind != RoleKind::director)
      throw Error(ErrorCode::internal, "judgment messages must come from a director");
    std::string name = role.character_binding ? *role.character_binding : role.persona;
    rounds.push_back({round, role.kind, std::move(name), kind, std::move(payload)});
  }

  int count(MessageKind kind) const {
    int n = 0;
    for (const auto& e : rounds) n += (e.kind == kind);
    return n;
  }
  int max_round() const { return rounds.empty() ? 0 : rounds.back().round; }

  void extend(const Transcript& other) {
    rounds.insert(rounds.end(), other.rounds.begin(), other.rounds.end());
  }
};

struct LoopConfig {
  int max_rounds = 3;              // judgment cycles per stage
  int retry_on_parse_failure = 1;  // re-asks per message
};

// ---------------------------------------------------------------------------
// Backend contract

struct Prompt {
  std::string instructions;
  json context;
};

class AgentBackend {
 public:
  virtual ~AgentBackend() = default;
  virtual std::string complete(const Role& role, const Prompt& prompt,
                               const std::string& schema_id) = 0;
};

// ---------------------------------------------------------------------------
// Strict structured parsing

namespace detail {

inline void fail(const std::string& location, const std::string& why) {
  throw ParseError(location, why);
}

inline void check_object(const json& v, const std::string& loc,
                         const std::vector<std::string>& required,
                         const std::vector<std::string>& optional = {}) {
  if (!v.is_object()) fail(loc, "expected object");
  for (const auto& key : required)
    if (!v.contains(key)) fail(loc, "missing field '" + key + "'");
  for (const auto& [key, _] : v.items()) {
    bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                 std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) fail(loc, "unknown field '" + key + "'");
  }
}

inline std::string require_string(const json& v, const std::string& loc, const std::string& key) {
  if (!v.at(key).is_string()) fail(loc + "." + key, "expected string");
  return v.at(key).get<std::string>();
}

inline double require_number(const json& v, const std::string& loc, const std::string& key) {
  if (!v.at(key).is_number()) fail(loc + "." + key, "expected number");
  return v.at(key).get<double>();
}

inline long require_integer(const json& v, const std::string& loc, const std::string& key) {
  if (!v.at(key).is_number_integer()) fail(loc + "." + key, "expected integer");
  return v.at(key).get<long>();
}

inline bool require_bool(const json& v, const std::string& loc, const std::string& key) {
  if (!v.at(key).is_boolean()) fail(loc + "." + key, "expected boolean");
  return v.at(key).get<bool>();
}

inline const json& require_array(const json& v, const std::string& loc, const std::string& key) {
  if (!v.at(key).is_array()) fail(loc + "." + key, "expected array");
  return v.at(key);
}

inline void require_enum(const json& v, const std::string& loc, const std::string& key,
                         const std::vector<std::string>& allowed) {
  std::string s = require_string(v, loc, key);
  if (std::find(allowed.begin(), allowed.end(), s) == allowed.end())
    fail(loc + "." + key, "value '" + s + "' not in allowed set");
}

inline void check_behaviour_endpoint(const json& v, const std::string& loc, const std::string& which) {
  // exactly one of <which>_parcel / <which>_seat / <which>_pos
  int carriers = v.contains(which + "_parcel") + v.contains(which + "_seat") +
                 v.contains(which + "_pos");
  if (carriers != 1)
    fail(loc, "exactly one of " + which + "_parcel/" + which + "_seat/" + which +
                  "_pos is required");
  if (v.contains(which + "_parcel")) {
    const json& a = v.at(which + "_parcel");
    if (!a.is_array() || a.size() != 2 || !a[0].is_number_integer() || !a[1].is_number_integer())
      fail(loc + "." + which + "_parcel", "expected [row, col]");
  }
  if (v.contains(which + "_pos")) {
    const json& a = v.at(which + "_pos");
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
      fail(loc + "." + which + "_pos", "expected [x, y]");
  }
  if (v.contains(which + "_seat") && !v.at(which + "_seat").is_string())
    fail(loc + "." + which + "_seat", "expected seat object id");
}

inline void validate_behaviour_record(const json& v, const std::string& loc) {
  check_object(v, loc, {"character", "start_state", "end_state", "start_facing", "end_facing"},
               {"start_parcel", "start_seat", "start_pos", "end_parcel", "end_seat", "end_pos"});
  require_string(v, loc, "character");
  require_enum(v, loc, "start_state", {"standing", "sitting"});
  require_enum(v, loc, "end_state", {"standing", "sitting"});
  require_number(v, loc, "start_facing");
  require_number(v, loc, "end_facing");
  check_behaviour_endpoint(v, loc, "start");
  check_behaviour_endpoint(v, loc, "end");
}

}  // namespace detail

// Validates raw backend text against a named schema; unknown fields are
// rejected everywhere. Returns the parsed document.
inline json parse_structured(const std::string& raw, const std::string& schema_id) {
  using namespace detail;
  std::string text = raw;
  // tolerate fenced output from chat models
  auto fence = text.find("```");
  if (fence != std::string::npos) {
    auto start = text.find('\n', fence);
    auto end = text.rfind("```");
    if (start != std::string::npos && end > start) text = text.substr(start + 1, end - start - 1);
  }
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) fail(schema_id, "not valid JSON");

  if (schema_id == "profiles") {
    check_object(v, schema_id, {"profiles"});
    for (std::size_t i = 0; i < require_array(v, schema_id, "profiles").size(); ++i) {
      std::string loc = "profiles[" + std::to_string(i) + "]";
      const json& p = v["profiles"][i];
      check_object(p, loc, {"name", "age", "gender", "occupation", "traits", "speaking_style"});
      require_string(p, loc, "name");
      require_integer(p, loc, "age");
      require_enum(p, loc, "gender", {"female", "male", "other"});
      require_string(p, loc, "occupation");
      require_string(p, loc, "traits");
      require_string(p, loc, "speaking_style");
    }
  } else if (schema_id == "acts") {
    check_object(v, schema_id, {"acts"});
    for (std::size_t i = 0; i < require_array(v, schema_id, "acts").size(); ++i) {
      std::string loc = "acts[" + std::to_string(i) + "]";
      const json& a = v["acts"][i];
      check_object(a, loc,
                   {"index", "sub_topic", "participants", "scene_description", "plot",
                    "dialogue_goal"});
      require_integer(a, loc, "index");
      require_string(a, loc, "sub_topic");
      for (const auto& name : require_array(a, loc, "participants"))
        if (!name.is_string()) fail(loc + ".participants", "expected strings");
      require_string(a, loc, "scene_description");
      require_string(a, loc, "plot");
      require_string(a, loc, "dialogue_goal");
    }
  } else if (schema_id == "act_clips") {
    check_object(v, schema_id, {"clips"});
    for (std::size_t i = 0; i < require_array(v, schema_id, "clips").size(); ++i) {
      std::string loc = "clips[" + std::to_string(i) + "]";
      const json& c = v["clips"][i];
      check_object(c, loc, {"index", "lines"}, {"duration"});
      require_integer(c, loc, "index");
      if (c.contains("duration")) require_number(c, loc, "duration");
      const json& lines = require_array(c, loc, "lines");
      for (std::size_t j = 0; j < lines.size(); ++j) {
        std::string lloc = loc + ".lines[" + std::to_string(j) + "]";
        check_object(lines[j], lloc, {"speaker", "text"});
        require_string(lines[j], lloc, "speaker");
        require_string(lines[j], lloc, "text");
      }
    }
  } else if (schema_id == "feedback") {
    check_object(v, schema_id, {"feedback"});
    require_string(v, schema_id, "feedback");
  } else if (schema_id == "judgment") {
    check_object(v, schema_id, {"approved", "feedback"});
    require_bool(v, schema_id, "approved");
    require_string(v, schema_id, "feedback");
  } else if (schema_id == "behaviour") {
    detail::validate_behaviour_record(v, schema_id);
  } else if (schema_id == "blocking") {
    check_object(v, schema_id, {"behaviours"});
    const json& list = require_array(v, schema_id, "behaviours");
    for (std::size_t i = 0; i < list.size(); ++i)
      detail::validate_behaviour_record(list[i], "behaviours[" + std::to_string(i) + "]");
  } else if (schema_id == "motions") {
    check_object(v, schema_id, {"motions"});
    const json& list = require_array(v, schema_id, "motions");
    for (std::size_t i = 0; i < list.size(); ++i) {
      std::string loc = "motions[" + std::to_string(i) + "]";
      check_object(list[i], loc, {"character", "motion_id"});
      require_string(list[i], loc, "character");
      require_integer(list[i], loc, "motion_id");
    }
  } else if (schema_id == "camera_proposal" || schema_id == "camera_choice") {
    check_object(v, schema_id, {"type", "params", "rationale"});
    require_string(v, schema_id, "type");
    if (!v.at("params").is_object()) fail(schema_id + ".params", "expected object");
    require_string(v, schema_id, "rationale");
  } else if (schema_id == "critique") {
    check_object(v, schema_id, {"critique"});
    require_string(v, schema_id, "critique");
  } else if (schema_id == "ornaments") {
    check_object(v, schema_id, {"suggestions"});
    for (const auto& s : require_array(v, schema_id, "suggestions"))
      if (!s.is_string()) fail("suggestions", "expected strings");
  } else {
    fail(schema_id, "unknown schema id");
  }
  return v;
}

// Backend call + strict parse, re-asking up to cfg.retry_on_parse_failure
// times before giving up.
inline json ask(AgentBackend& backend, const Role& role, const Prompt& prompt,
                const std::string& schema_id, const LoopConfig& cfg) {
  std::string last_error;
  for (int attempt = 0; attempt <= cfg.retry_on_parse_failure; ++attempt) {
    Prompt p = prompt;
    if (attempt > 0)
      p.instructions += "\nYour previous reply was rejected (" + last_error +
                        "). Reply with valid JSON for schema '" + schema_id + "' only.";
    std::string raw = backend.complete(role, p, schema_id);
    try {
      return parse_structured(raw, schema_id);
    } catch (const ParseError& e) {
      last_error = e.what();
    }
  }
  throw BackendError("backend output unparseable after retries: " + last_error);
}

// ---------------------------------------------------------------------------
// Discuss-Revise-Judge

struct Judgment {
  bool approved = false;
  std::string feedback;
};

template <typename Artifact>
struct DrjResult {
  Artifact artifact;
  bool approved = false;
  int rounds = 0;
  Transcript transcript;
};

// One feedback-giving role with its callback.
template <typename Artifact>
using FeedbackHook = std::pair<Role, std::function<std::string(const Artifact&)>>;

// Draft -> per-role feedback -> revision -> director judgment. Approval ends
// the loop; a rejection feeds the director's feedback into a fresh revision
// that opens the next round. At the round cap the best-scoring judged
// revision is returned unapproved.
template <typename Artifact>
DrjResult<Artifact> run_discuss_revise_judge(
    const Role& draft_role, const std::function<std::pair<Artifact, std::string>()>& make_draft,
    const std::vector<FeedbackHook<Artifact>>& feedback_roles, const Role& revise_role,
    const std::function<std::pair<Artifact, std::string>(const Artifact&,
                                                         const std::vector<std::string>&)>& revise,
    const Role& judge_role, const std::function<Judgment(const Artifact&)>& judge,
    const std::function<double(const Artifact&)>& score, const LoopConfig& cfg) {
  if (judge_role.kind != RoleKind::director)
    throw Error(ErrorCode::internal, "run_discuss_revise_judge: judge must be a director");

  Transcript transcript;
  auto [current, draft_payload] = make_draft();
  transcript.append(1, draft_role, MessageKind::draft, draft_payload);

  std::optional<Artifact> best;
  double best_score = std::numeric_limits<double>::infinity();

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    std::vector<std::string> feedbacks;
    for (const auto& [role, hook] : feedback_roles) {
      std::string fb = hook(current);
      transcript.append(round, role, MessageKind::feedback, fb);
      feedbacks.push_back(std::move(fb));
    }
    auto [revised, revised_payload] = revise(current, feedbacks);
    current = std::move(revised);
    transcript.append(round, revise_role, MessageKind::revision, revised_payload);

    Judgment j = judge(current);
    transcript.append(round, judge_role, MessageKind::judgment,
                      j.approved ? "approved" : j.feedback);
    double s = score(current);
    if (s < best_score) {
      best_score = s;
      best = current;
    }
    if (j.approved) return {current, true, round, std::move(transcript)};

    if (round < cfg.max_rounds) {
      auto [redone, redo_payload] = revise(current, {j.feedback});
      current = std::move(redone);
      transcript.append(round + 1, revise_role, MessageKind::revision, redo_payload);
    }
  }
  return {*best, false, cfg.max_rounds, std::move(transcript)};
}

// ---------------------------------------------------------------------------
// Debate-Judge-Validation

template <typename Choice, typename Report>
struct DjvResult {
  Choice choice;
  std::optional<Report> report;
  bool passed = false;
  bool fallback = false;  // set when the repair ladder gave up
  int validations = 0;
  Transcript transcript;
};

template <typename Choice>
using Proposer = std::pair<Role, std::function<std::pair<Choice, std::string>()>>;

// Two independent proposals, one critique exchange, a director choice, then
// validate/adjust cycles bounded by max_validation_attempts.
template <typename Choice, typename Report>
DjvResult<Choice, Report> run_debate_judge_validation(
    const std::array<Proposer<Choice>, 2>& proposers,
    const std::array<std::function<std::string(const Choice&)>, 2>& critiques,
    const Role& judge_role,
    const std::function<std::pair<Choice, std::string>(const Choice&, const Choice&,
                                                       const std::string&, const std::string&)>&
        judge,
    const std::function<Report(const Choice&)>& validate,
    const std::function<bool(const Report&)>& report_passed,
    const std::function<std::string(const Report&)>& report_payload,
    const std::function<std::optional<Choice>(const Report&, const Choice&)>& adjust,
    int max_validation_attempts) {
  if (judge_role.kind != RoleKind::director)
    throw Error(ErrorCode::internal, "run_debate_judge_validation: judge must be a director");

  Transcript transcript;
  auto [p1, p1_payload] = proposers[0].second();
  transcript.append(1, proposers[0].first, MessageKind::proposal, p1_payload);
  auto [p2, p2_payload] = proposers[1].second();
  transcript.append(1, proposers[1].first, MessageKind::proposal, p2_payload);

  std::string c1 = critiques[0](p2);
  transcript.append(1, proposers[0].first, MessageKind::critique, c1);
  std::string c2 = critiques[1](p1);
  transcript.append(1, proposers[1].first, MessageKind::critique, c2);

  auto [choice, choice_payload] = judge(p1, p2, c1, c2);
  transcript.append(1, judge_role, MessageKind::judgment, choice_payload);

  DjvResult<Choice, Report> result;
  result.choice = choice;
  Choice current = choice;
  for (int attempt = 1; attempt <= max_validation_attempts; ++attempt) {
    Report report = validate(current);
    result.validations = attempt;
    transcript.append(attempt, judge_role, MessageKind::validation_result,
                      report_payload(report));
    if (report_passed(report)) {
      result.choice = current;
      result.report = report;
      result.passed = true;
      result.transcript = std::move(transcript);
      return result;
    }
    result.report = report;
    std::optional<Choice> adjusted = adjust(report, current);
    if (!adjusted) break;
    current = *adjusted;
  }
  result.choice = current;
  result.fallback = true;
  result.transcript = std::move(transcript);
  return result;
}

// ---------------------------------------------------------------------------
// Screenplay development

namespace detail {

inline std::vector<Clip> clips_from_json(const json& v) {
  std::vector<Clip> clips;
  for (const auto& c : v.at("clips")) {
    Clip clip;
    clip.index = static_cast<int>(c.at("index").get<long>());
    for (const auto& l : c.at("lines"))
      clip.lines.push_back({l.at("speaker").get<std::string>(), l.at("text").get<std::string>()});
    clip.duration_s = c.contains("duration") ? c.at("duration").get<double>()
                                             : kSecondsPerLine * clip.lines.size();
    clips.push_back(std::move(clip));
  }
  return clips;
}

inline json clips_to_json(const std::vector<Clip>& clips) {
  json arr = json::array();
  for (const auto& c : clips) {
    json lines = json::array();
    for (const auto& l : c.lines) lines.push_back({{"speaker", l.speaker}, {"text", l.text}});
    arr.push_back({{"index", c.index}, {"lines", lines}, {"duration", c.duration_s}});
  }
  return json{{"clips", arr}};
}

inline double count_act_violations(const Screenplay& sketch) {
  return static_cast<double>(validate_screenplay(sketch).size());
}

}  // namespace detail

struct ScreenplayResult {
  Screenplay screenplay;
  Transcript transcript;
};

// Profiles, act decomposition, then a discuss-revise-judge pass per act with
// actors bound to its participants.
inline ScreenplayResult develop_screenplay(const std::string& idea, AgentBackend& backend,
                                           const LoopConfig& cfg,
                                           const prompts::PromptLibrary& prompts = {}) {
  if (idea.empty()) throw ValidationError("develop_screenplay: idea is empty");

  Role screenwriter = make_role(RoleKind::screenwriter, "screenwriter");
  Role director = make_role(RoleKind::director, "director");

  Screenplay play;
  play.idea = idea;
  Transcript transcript;

  json profiles_doc = ask(backend, screenwriter,
                          {prompts.render("profiles"), json{{"idea", idea}}}, "profiles", cfg);
  for (const auto& p : profiles_doc.at("profiles")) {
    CharacterProfile profile;
    profile.name = p.at("name").get<std::string>();
    profile.age = static_cast<int>(p.at("age").get<long>());
    std::string g = p.at("gender").get<std::string>();
    profile.gender = g == "female" ? Gender::female : g == "male" ? Gender::male : Gender::other;
    profile.occupation = p.at("occupation").get<std::string>();
    profile.traits = p.at("traits").get<std::string>();
    profile.speaking_style = p.at("speaking_style").get<std::string>();
    play.profiles.push_back(std::move(profile));
  }

  json profile_names = json::array();
  for (const auto& p : play.profiles) profile_names.push_back(p.name);
  json acts_doc = ask(backend, screenwriter,
                      {prompts.render("acts"), json{{"idea", idea}, {"profiles", profile_names}}},
                      "acts", cfg);

  for (const auto& a : acts_doc.at("acts")) {
    Act act;
    act.index = static_cast<int>(a.at("index").get<long>());
    act.sub_topic = a.at("sub_topic").get<std::string>();
    for (const auto& name : a.at("participants")) act.participants.push_back(name);
    act.scene_description = a.at("scene_description").get<std::string>();
    act.plot = a.at("plot").get<std::string>();
    act.dialogue_goal = a.at("dialogue_goal").get<std::string>();

    json act_ctx{{"idea", idea},
                 {"act",
                  {{"index", act.index},
                   {"sub_topic", act.sub_topic},
                   {"participants", act.participants},
                   {"scene_description", act.scene_description},
                   {"plot", act.plot},
                   {"dialogue_goal", act.dialogue_goal}}},
                 {"profiles", profile_names}};

    std::vector<FeedbackHook<std::vector<Clip>>> feedback_roles;
    for (const auto& name : act.participants) {
      Role actor = make_actor(name);
      feedback_roles.push_back(
          {actor, [&, actor, name](const std::vector<Clip>& clips) {
             json ctx = act_ctx;
             ctx["draft"] = detail::clips_to_json(clips);
             json fb = ask(backend, actor,
                           {prompts.render("actor_feedback", {{"character", name}}), ctx},
                           "feedback", cfg);
             return fb.at("feedback").get<std::string>();
           }});
    }

    auto drj = run_discuss_revise_judge<std::vector<Clip>>(
        screenwriter,
        [&]() {
          json doc = ask(backend, screenwriter, {prompts.render("act_clips_draft"), act_ctx},
                         "act_clips", cfg);
          return std::make_pair(detail::clips_from_json(doc), doc.dump());
        },
        feedback_roles, screenwriter,
        [&](const std::vector<Clip>& clips, const std::vector<std::string>& feedback) {
          json ctx = act_ctx;
          ctx["draft"] = detail::clips_to_json(clips);
          ctx["feedback"] = feedback;
          json doc =
              ask(backend, screenwriter, {prompts.render("act_clips_revise"), ctx}, "act_clips", cfg);
          return std::make_pair(detail::clips_from_json(doc), doc.dump());
        },
        director,
        [&](const std::vector<Clip>& clips) {
          json ctx = act_ctx;
          ctx["draft"] = detail::clips_to_json(clips);
          json doc = ask(backend, director, {prompts.render("director_judgment"), ctx}, "judgment",
                         cfg);
          return Judgment{doc.at("approved").get<bool>(), doc.at("feedback").get<std::string>()};
        },
        [&](const std::vector<Clip>& clips) {
          Screenplay sketch = play;
          Act probe = act;
          probe.clips = clips;
          sketch.acts.push_back(probe);
          return detail::count_act_violations(sketch);
        },
        cfg);

    act.clips = drj.artifact;
    transcript.extend(drj.transcript);
    play.acts.push_back(std::move(act));
  }

  auto violations = validate_screenplay(play);
  if (!violations.empty()) {
    std::string msg = "develop_screenplay: screenplay malformed:";
    for (const auto& v : violations) msg += " [" + v.field + " " + v.rule + ": " + v.detail + "]";
    throw ValidationError(msg);
  }
  return {std::move(play), std::move(transcript)};
}

}  // namespace previz::agents
