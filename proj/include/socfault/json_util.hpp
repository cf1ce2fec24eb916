#pragma once

#include "socfault/types.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace socfault {

/// Accepts plain integers or "0x..." strings.
inline u64 json_u64(const nlohmann::json& j) {
    if (j.is_string())
        return std::stoull(j.get_ref<const std::string&>(), nullptr, 0);
    if (j.is_number_integer() && j.get<i64>() < 0)
        return static_cast<u64>(j.get<i64>());
    return j.get<u64>();
}

inline i64 json_i64(const nlohmann::json& j) {
    if (j.is_string())
        return std::stoll(j.get_ref<const std::string&>(), nullptr, 0);
    return j.get<i64>();
}

} // namespace socfault
