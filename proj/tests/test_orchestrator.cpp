#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "previz/backends.hpp"

using namespace previz;
using agents::AgentBackend;
using agents::json;
using agents::LoopConfig;
using agents::MessageKind;
using agents::Role;
using agents::RoleKind;
using agents::Transcript;

namespace {

// minimal DRJ harness over a string artifact with a scripted judge pattern
struct JudgePattern {
  std::vector<bool> verdicts;
  std::size_t next = 0;
  bool operator()() { return next < verdicts.size() ? verdicts[next++] : false; }
};

agents::DrjResult<std::string> run_drj(JudgePattern& judge, const LoopConfig& cfg,
                                       std::vector<double> scores = {}) {
  Role writer = agents::make_role(RoleKind::screenwriter, "writer");
  Role director = agents::make_role(RoleKind::director, "director");
  Role actor = agents::make_actor("Ava");
  int revision = 0;
  auto score_of = [scores](const std::string& artifact) {
    // artifact is "rev<k>"; caller-supplied scores index by k, default k
    int k = std::stoi(artifact.substr(3));
    if (k < static_cast<int>(scores.size())) return scores[k];
    return static_cast<double>(k);
  };
  return agents::run_discuss_revise_judge<std::string>(
      writer, [&] { return std::make_pair(std::string("rev0"), std::string("draft")); },
      {{actor, [](const std::string&) { return "tighten the middle"; }}}, writer,
      [&](const std::string&, const std::vector<std::string>&) {
        ++revision;
        return std::make_pair("rev" + std::to_string(revision),
                              "revision " + std::to_string(revision));
      },
      director,
      [&](const std::string&) {
        return agents::Judgment{judge(), "needs work"};
      },
      score_of, cfg);
}

}  // namespace

TEST_CASE("parse_structured accepts a well-formed behaviour payload") {
  json doc = agents::parse_structured(R"({
    "character": "Ava",
    "start_state": "standing", "end_state": "sitting",
    "start_parcel": [2, 3], "end_seat": "chair",
    "start_facing": 0.5, "end_facing": 1.0
  })",
                              "behaviour");
  CHECK(doc.at("character") == "Ava");
}

TEST_CASE("parse_structured names the missing field") {
  try {
    agents::parse_structured(R"({
      "character": "Ava", "start_state": "standing",
      "start_pos": [1.0, 2.0], "end_pos": [1.0, 2.0],
      "start_facing": 0, "end_facing": 0
    })",
                             "behaviour");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("end_state") != std::string::npos);
  }
}

TEST_CASE("parse_structured rejects unknown fields") {
  CHECK_THROWS_AS(agents::parse_structured(R"({
    "character": "Ava",
    "start_state": "standing", "end_state": "standing",
    "start_pos": [0, 0], "end_pos": [0, 0],
    "start_facing": 0, "end_facing": 0,
    "mood": "wistful"
  })",
                                           "behaviour"),
                  ParseError);
  CHECK_THROWS_AS(agents::parse_structured(R"({"approved": true, "feedback": "", "extra": 1})",
                                           "judgment"),
                  ParseError);
  CHECK_THROWS_AS(agents::parse_structured("not json at all", "judgment"), ParseError);
  CHECK_THROWS_AS(agents::parse_structured("{}", "no_such_schema"), ParseError);
}

TEST_CASE("parse_structured tolerates code fences around the document") {
  json doc = agents::parse_structured("```json\n{\"feedback\": \"fine\"}\n```", "feedback");
  CHECK(doc.at("feedback") == "fine");
}

TEST_CASE("ask retries parse failures up to the configured bound") {
  struct FlakyBackend : AgentBackend {
    int calls = 0;
    int good_after = 1;
    std::string complete(const Role&, const agents::Prompt&, const std::string&) override {
      return calls++ < good_after ? "garbage" : R"({"feedback": "ok"})";
    }
  };

  Role r = agents::make_role(RoleKind::screenwriter, "w");
  LoopConfig cfg;  // one re-ask
  FlakyBackend once;
  json doc = agents::ask(once, r, {"", json::object()}, "feedback", cfg);
  CHECK(doc.at("feedback") == "ok");
  CHECK(once.calls == 2);

  FlakyBackend twice;
  twice.good_after = 2;
  CHECK_THROWS_AS(agents::ask(twice, r, {"", json::object()}, "feedback", cfg), BackendError);
  CHECK(twice.calls == 2);  // initial ask + one retry, then give up
}

TEST_CASE("discuss-revise-judge approves on round 1") {
  JudgePattern judge{{true}};
  auto result = run_drj(judge, {});
  CHECK(result.approved);
  CHECK(result.rounds == 1);
  CHECK(result.artifact == "rev1");
  CHECK(result.transcript.count(MessageKind::judgment) == 1);
  CHECK(result.transcript.count(MessageKind::draft) == 1);
  CHECK(result.transcript.count(MessageKind::feedback) == 1);
  CHECK(result.transcript.count(MessageKind::revision) == 1);
}

TEST_CASE("discuss-revise-judge approves exactly at the round cap") {
  JudgePattern judge{{false, false, true}};
  auto result = run_drj(judge, {});
  CHECK(result.approved);
  CHECK(result.rounds == 3);
  CHECK(result.transcript.count(MessageKind::judgment) == 3);
}

TEST_CASE("discuss-revise-judge at cap returns the best-scoring revision unapproved") {
  JudgePattern judge{{false, false, false}};
  // judged revisions are rev1, rev3, rev5 (each rejection inserts an extra
  // director-feedback revision); give rev3 the best score
  std::vector<double> scores(8, 9.0);
  scores[1] = 3.0;
  scores[3] = 1.0;
  scores[5] = 2.0;
  auto result = run_drj(judge, {}, scores);
  CHECK_FALSE(result.approved);
  CHECK(result.rounds == 3);
  CHECK(result.artifact == "rev3");

  // hand-traced message sequence per the loop contract
  std::vector<MessageKind> expected = {
      MessageKind::draft,
      MessageKind::feedback, MessageKind::revision, MessageKind::judgment,   // round 1
      MessageKind::revision,                                                 // director redo
      MessageKind::feedback, MessageKind::revision, MessageKind::judgment,   // round 2
      MessageKind::revision,                                                 // director redo
      MessageKind::feedback, MessageKind::revision, MessageKind::judgment};  // round 3
  REQUIRE(result.transcript.rounds.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(result.transcript.rounds[i].kind == expected[i]);
  // rounds non-decreasing, judgments only from directors
  int prev = 0;
  for (const auto& entry : result.transcript.rounds) {
    CHECK(entry.round >= prev);
    prev = entry.round;
    if (entry.kind == MessageKind::judgment) CHECK(entry.role == RoleKind::director);
  }
}

TEST_CASE("debate-judge-validation counts validation rounds") {
  Role cine1 = agents::make_role(RoleKind::cinematographer, "p1");
  Role cine2 = agents::make_role(RoleKind::cinematographer, "p2");
  Role director = agents::make_role(RoleKind::director, "d");

  auto make = [&](int fail_times) {
    auto counter = std::make_shared<int>(0);
    return agents::run_debate_judge_validation<int, bool>(
        {agents::Proposer<int>{cine1, [] { return std::make_pair(1, "one"); }},
         agents::Proposer<int>{cine2, [] { return std::make_pair(2, "two"); }}},
        {[](const int&) { return "weak"; }, [](const int&) { return "strong"; }}, director,
        [](const int& a, const int&, const std::string&, const std::string&) {
          return std::make_pair(a, "choice");
        },
        [counter, fail_times](const int&) { return (*counter)++ >= fail_times; },
        [](const bool& ok) { return ok; },
        [](const bool& ok) { return std::string(ok ? "pass" : "fail"); },
        [](const bool&, const int& v) { return std::optional<int>(v + 10); }, 5);
  };

  auto immediate = make(0);
  CHECK(immediate.passed);
  CHECK(immediate.validations == 1);
  CHECK(immediate.choice == 1);
  CHECK(immediate.transcript.count(MessageKind::proposal) == 2);
  CHECK(immediate.transcript.count(MessageKind::critique) == 2);
  CHECK(immediate.transcript.count(MessageKind::judgment) == 1);
  CHECK(immediate.transcript.count(MessageKind::validation_result) == 1);

  auto third_try = make(2);
  CHECK(third_try.passed);
  CHECK(third_try.validations == 3);
  CHECK(third_try.transcript.count(MessageKind::validation_result) == 3);
  CHECK(third_try.choice == 21);  // two adjustments applied
}

TEST_CASE("debate-judge-validation surfaces the fallback flag when adjuster gives up") {
  Role cine1 = agents::make_role(RoleKind::cinematographer, "p1");
  Role cine2 = agents::make_role(RoleKind::cinematographer, "p2");
  Role director = agents::make_role(RoleKind::director, "d");

  auto result = agents::run_debate_judge_validation<int, bool>(
      {agents::Proposer<int>{cine1, [] { return std::make_pair(1, "one"); }},
       agents::Proposer<int>{cine2, [] { return std::make_pair(2, "two"); }}},
      {[](const int&) { return "a"; }, [](const int&) { return "b"; }}, director,
      [](const int& a, const int&, const std::string&, const std::string&) {
        return std::make_pair(a, "choice");
      },
      [](const int&) { return false; }, [](const bool& ok) { return ok; },
      [](const bool&) { return std::string("fail"); },
      [](const bool&, const int&) { return std::optional<int>{}; }, 5);

  CHECK_FALSE(result.passed);
  CHECK(result.fallback);
  CHECK(result.validations == 1);
}

TEST_CASE("loop bounds hold under randomized judge and validator behavior", "[property]") {
  std::mt19937 rng(20260809);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 60; ++trial) {
    JudgePattern judge{{coin(rng), coin(rng), coin(rng), coin(rng)}};
    auto result = run_drj(judge, {});
    CHECK(result.transcript.count(MessageKind::judgment) <= 3);
    CHECK(result.rounds <= 3);

    Role cine1 = agents::make_role(RoleKind::cinematographer, "p1");
    Role cine2 = agents::make_role(RoleKind::cinematographer, "p2");
    Role director = agents::make_role(RoleKind::director, "d");
    int fail_times = static_cast<int>(rng() % 8);
    int counter = 0;
    auto djv = agents::run_debate_judge_validation<int, bool>(
        {agents::Proposer<int>{cine1, [] { return std::make_pair(1, "p"); }},
         agents::Proposer<int>{cine2, [] { return std::make_pair(2, "q"); }}},
        {[](const int&) { return "c1"; }, [](const int&) { return "c2"; }}, director,
        [](const int& a, const int&, const std::string&, const std::string&) {
          return std::make_pair(a, "j");
        },
        [&counter, fail_times](const int&) { return counter++ >= fail_times; },
        [](const bool& ok) { return ok; }, [](const bool&) { return std::string("r"); },
        [](const bool&, const int& v) { return std::optional<int>(v); }, 5);
    CHECK(djv.validations <= 5);
    CHECK(djv.transcript.count(MessageKind::validation_result) == djv.validations);
    CHECK(djv.transcript.count(MessageKind::proposal) == 2);
    CHECK(djv.transcript.count(MessageKind::critique) == 2);
  }
}

TEST_CASE("develop_screenplay with the rule-driven scripted backend is deterministic") {
  agents::ScriptedBackend backend;
  auto first = agents::develop_screenplay("a quiet argument in an office", backend, {});
  CHECK(validate_screenplay(first.screenplay).empty());
  CHECK(first.screenplay.acts.size() == 3);
  CHECK_FALSE(first.screenplay.profiles.empty());

  agents::ScriptedBackend backend2;
  auto second = agents::develop_screenplay("a quiet argument in an office", backend2, {});
  CHECK(first.screenplay == second.screenplay);

  // clip durations default to 2 s per line when the backend omits them
  for (const auto& act : first.screenplay.acts)
    for (const auto& clip : act.clips)
      CHECK(clip.duration_s == Catch::Approx(2.0 * clip.lines.size()));
}

TEST_CASE("develop_screenplay rejects acts that reference undeclared characters") {
  json fixture{{"fallback_to_rules", true},
               {"responses",
                {{"acts",
                  {json{{"acts",
                         {{{"index", 1},
                           {"sub_topic", "Part 1"},
                           {"participants", {"Nobody"}},
                           {"scene_description", "x"},
                           {"plot", "y"},
                           {"dialogue_goal", "z"}}}}}
                       .dump()}}}}};
  agents::ScriptedBackend backend(fixture);
  CHECK_THROWS_AS(agents::develop_screenplay("idea", backend, {}), ValidationError);
}

TEST_CASE("recorded sessions replay to the identical screenplay") {
  agents::ScriptedBackend inner;
  agents::RecordingBackend recorder(inner);
  auto original = agents::develop_screenplay("replay fidelity check", recorder, {});

  agents::ReplayBackend replay(recorder.recording());
  auto replayed = agents::develop_screenplay("replay fidelity check", replay, {});
  CHECK(original.screenplay == replayed.screenplay);

  // schema mismatch is an error
  agents::ReplayBackend empty(json::array());
  CHECK_THROWS_AS(agents::develop_screenplay("x", empty, {}), BackendError);
}

TEST_CASE("scripted backend without fixtures or rules for a schema fails loudly") {
  agents::ScriptedBackend strict(json{{"fallback_to_rules", false}});
  Role r = agents::make_role(RoleKind::screenwriter, "w");
  CHECK_THROWS_AS(strict.complete(r, {"", json::object()}, "profiles"), BackendError);
}

TEST_CASE("transcript invariants are enforced") {
  Transcript t;
  Role writer = agents::make_role(RoleKind::screenwriter, "w");
  Role director = agents::make_role(RoleKind::director, "d");
  t.append(1, writer, MessageKind::draft, "x");
  CHECK_THROWS_AS(t.append(0, writer, MessageKind::feedback, "y"), Error);
  CHECK_THROWS_AS(t.append(1, writer, MessageKind::judgment, "y"), Error);
  t.append(1, director, MessageKind::judgment, "approved");
  CHECK(t.rounds.size() == 2);
}

TEST_CASE("role invariants") {
  CHECK(agents::validate_role(agents::make_actor("Ava")).empty());
  CHECK(agents::validate_role(agents::make_role(RoleKind::director, "d")).empty());
  Role broken{RoleKind::actor, "a", std::nullopt};
  CHECK_FALSE(agents::validate_role(broken).empty());
  Role bound_director{RoleKind::director, "d", "Ava"};
  CHECK_FALSE(agents::validate_role(bound_director).empty());
}
