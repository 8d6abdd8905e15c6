#pragma once

#include <string>

namespace adt {

/// Whom a measure value describes: one user, or the group of all users.
struct Scope {
    enum class Kind { User, Group };

    Kind kind = Kind::Group;
    std::string user_id;

    static Scope user(std::string id) { return {Kind::User, std::move(id)}; }
    static Scope group() { return {Kind::Group, {}}; }

    bool is_group() const { return kind == Kind::Group; }

    bool operator==(const Scope&) const = default;
};

}  // namespace adt
