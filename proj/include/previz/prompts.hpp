#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "previz/errors.hpp"

// Role prompt templates. The repo ships the same texts under prompts/; a
// directory override lets users edit them without rebuilding.
namespace previz::prompts {

inline const std::map<std::string, std::string>& builtin_templates() {
  static const std::map<std::string, std::string> t = {
      {"profiles",
       "You are the screenwriter. From the idea below, invent the cast.\n"
       "For each character give name, age, gender, occupation, personality traits\n"
       "and speaking style in detail. Respond with JSON only."},
      {"acts",
       "You are the screenwriter. Decompose the idea into acts. Each act needs a\n"
       "sub_topic, participating characters, a short scene_description, a story\n"
       "plot and a dialogue_goal. Respond with JSON only."},
      {"act_clips_draft",
       "You are the screenwriter. Draft the dialogue for this act as an ordered\n"
       "list of clips. Each clip holds dialogue lines (speaker, text). Respond\n"
       "with JSON only."},
      {"act_clips_revise",
       "You are the screenwriter. Revise the draft below to address every piece\n"
       "of feedback while keeping the act structure. Respond with JSON only."},
      {"actor_feedback",
       "You play {{character}}. Read the draft and give concise feedback on your\n"
       "character's dialogue: voice, intent, pacing. Respond with JSON only."},
      {"director_judgment",
       "You are the director. Approve the draft only if dialogue, pacing and\n"
       "character intent are coherent; otherwise explain what must change.\n"
       "Respond with JSON only."},
      {"blocking_draft",
       "You are the first director. Using the detection map, the functional map\n"
       "(standing regions and seats) and the dialogue, propose each character's\n"
       "behaviour: start/end state (standing or sitting), position (region\n"
       "parcel, seat id, or coordinates) and facing. Respond with JSON only."},
      {"blocking_feedback_cinematographer",
       "You are the cinematographer. Judge the blocking for shot feasibility and\n"
       "visibility. Respond with JSON only."},
      {"blocking_feedback_scene_designer",
       "You are the scene designer. Judge the blocking for layout use and\n"
       "collision risk. Respond with JSON only."},
      {"blocking_feedback_actor",
       "You play {{character}}. Judge your own placement and facing for\n"
       "performance intent. Respond with JSON only."},
      {"blocking_revise",
       "You are the first director. Revise the blocking to address the feedback,\n"
       "staying on valid regions and seats. Respond with JSON only."},
      {"blocking_judgment",
       "You are the second director. Approve the blocking only if spatially valid\n"
       "and dramatically sound. Respond with JSON only."},
      {"motion_draft",
       "You are the screenwriter. Assign each character one motion id from the\n"
       "catalog, consistent with their physical state and the dialogue. Respond\n"
       "with JSON only."},
      {"motion_feedback",
       "You play {{character}}. Judge whether the proposed motion fits your state\n"
       "and intent. Respond with JSON only."},
      {"motion_revise",
       "You are the screenwriter. Revise the motion assignments to address the\n"
       "feedback. Respond with JSON only."},
      {"motion_judgment",
       "You are the director. Approve the motion assignments only if every choice\n"
       "is state-compatible and expressive. Respond with JSON only."},
      {"camera_proposal",
       "You are a cinematographer. Propose one camera template and parameters for\n"
       "this clip from the registry, with a short rationale. Respond with JSON\n"
       "only."},
      {"camera_critique",
       "You are a cinematographer. Critique the rival proposal: composition,\n"
       "coverage, safety. Respond with JSON only."},
      {"camera_choice",
       "You are the director. Choose or merge the two proposals into the final\n"
       "template and parameters, with rationale. Respond with JSON only."},
      {"ornament_suggestions",
       "You are the scene designer. Suggest decorative object labels that suit\n"
       "the scene description. Respond with JSON only."},
  };
  return t;
}

class PromptLibrary {
 public:
  PromptLibrary() : templates_(builtin_templates()) {}

  // Overrides built-ins with <name>.txt files from a directory.
  explicit PromptLibrary(const std::filesystem::path& dir) : PromptLibrary() {
    if (!std::filesystem::is_directory(dir))
      throw ConfigError("prompt directory not found: " + dir.string());
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.path().extension() != ".txt") continue;
      std::ifstream in(entry.path());
      std::stringstream ss;
      ss << in.rdbuf();
      templates_[entry.path().stem().string()] = ss.str();
    }
  }

  std::string render(const std::string& name,
                     const std::map<std::string, std::string>& vars = {}) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw ConfigError("unknown prompt template: " + name);
    std::string text = it->second;
    for (const auto& [key, value] : vars) {
      std::string tag = "{{" + key + "}}";
      for (std::size_t pos = text.find(tag); pos != std::string::npos; pos = text.find(tag))
        text.replace(pos, tag.size(), value);
    }
    return text;
  }

 private:
  std::map<std::string, std::string> templates_;
};

}  // namespace previz::prompts
