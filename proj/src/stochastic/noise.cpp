#include "scenecraft/stochastic/noise.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <string>

#include "scenecraft/error.hpp"

namespace scenecraft::stochastic {

using scene::Category;

std::string_view to_string(Style s) { return s == Style::kPerfect ? "perfect" : "natural"; }

Style style_from_string(std::string_view s) {
  if (s == "natural") return Style::kNatural;
  if (s == "perfect") return Style::kPerfect;
  throw Error(ErrorCode::kSpec, "style must be natural or perfect, got '" + std::string(s) + "'");
}

namespace {

constexpr std::array<std::string_view, 3> kNaturalWords{"lived-in", "cozy", "casual"};
constexpr std::array<std::string_view, 3> kPerfectWords{"pristine", "showroom", "gallery"};

bool contains_any(const std::string& text, const auto& words) {
  return std::any_of(words.begin(), words.end(),
                     [&](std::string_view w) { return text.find(w) != std::string::npos; });
}

}  // namespace

Style select_style(std::string_view prompt) {
  std::string lower(prompt);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (contains_any(lower, kNaturalWords)) return Style::kNatural;
  if (contains_any(lower, kPerfectWords)) return Style::kPerfect;
  return Style::kNatural;
}

NoiseProfile NoiseProfile::defaults() {
  NoiseProfile p;
  const double mm = 0.001;
  p.set(Category::kFurniture, Style::kNatural, {0.03, 0.03, 1.0});
  p.set(Category::kFurniture, Style::kPerfect, {mm, mm, 0.1});
  p.set(Category::kWall, Style::kNatural, {0.02, 0.01, 0.5});
  p.set(Category::kWall, Style::kPerfect, {mm, mm, 0.1});
  p.set(Category::kCeiling, Style::kNatural, {0.02, 0.02, 0.5});
  p.set(Category::kCeiling, Style::kPerfect, {mm, mm, 0.1});
  p.set(Category::kManipuland, Style::kNatural, {0.01, 0.01, 3.0});
  p.set(Category::kManipuland, Style::kPerfect, {mm, mm, 0.1});
  return p;
}

NoiseProfile NoiseProfile::none() {
  NoiseProfile p;
  for (auto c : {Category::kFurniture, Category::kWall, Category::kCeiling, Category::kManipuland})
    for (auto s : {Style::kNatural, Style::kPerfect}) p.set(c, s, {});
  return p;
}

const Sigma& NoiseProfile::sigma(Category c, Style s) const {
  auto it = table_.find({c, s});
  if (it == table_.end())
    throw Error(ErrorCode::kCategory, "no placement noise for category '" + std::string(scene::to_string(c)) + "'",
                {{"category", scene::to_string(c)}});
  return it->second;
}

void NoiseProfile::set(Category c, Style s, const Sigma& sigma) {
  if (!(sigma.x >= 0.0) || !(sigma.y >= 0.0) || !(sigma.yaw_deg >= 0.0))
    throw Error(ErrorCode::kSpec, "noise deviations must be non-negative");
  table_[{c, s}] = sigma;
}

geom::Pose2 apply_noise(const geom::Pose2& pose, Category category, Style style, Rng& rng,
                        const NoiseProfile& profile) {
  const Sigma& s = profile.sigma(category, style);
  auto draw = [&](double sd) {
    std::normal_distribution<double> n(0.0, 1.0);
    return sd * n(rng);
  };
  const double dx = draw(s.x);
  const double dy = draw(s.y);
  const double dt = draw(s.yaw_deg);
  return geom::Pose2(pose.x + dx, pose.y + dy, pose.theta_deg + dt);
}

nlohmann::json to_json(const NoiseProfile& p) {
  nlohmann::json out = nlohmann::json::object();
  for (auto c : {Category::kFurniture, Category::kWall, Category::kCeiling, Category::kManipuland}) {
    for (auto s : {Style::kNatural, Style::kPerfect}) {
      const auto& sg = p.sigma(c, s);
      out[std::string(scene::to_string(c))][std::string(to_string(s))] = {
          {"x", sg.x}, {"y", sg.y}, {"yaw_deg", sg.yaw_deg}};
    }
  }
  return out;
}

}  // namespace scenecraft::stochastic
