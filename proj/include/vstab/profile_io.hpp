#pragma once

#include <filesystem>

#include <json.hpp>

#include "vstab/profile.hpp"

namespace vstab {

/// Parameters with defaults for missing keys; unknown keys and out-of-range values throw
/// ValidationError.
ProfileParams params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const ProfileParams& params);

/// Full document: parameters, every term's knots, the cached Omega(-inf) and tail constant.
nlohmann::json profile_to_json(const Profile& p);
/// Rebuilds the profile and checks the stored Omega(-inf) against the recomputed value.
Profile profile_from_json(const nlohmann::json& j);

void save_profile(const Profile& p, const std::filesystem::path& path);
Profile load_profile(const std::filesystem::path& path);

nlohmann::json report_to_json(const ValidationReport& report);

}  // namespace vstab
