#pragma once

#include <string>
#include <utility>

namespace fractrace {

enum class Tri { Yes, No, Inconclusive };

const char* to_string(Tri value);

/// Three-valued answer to a question such as "x is in l_v".  Closed-form
/// rules always produce Yes/No with `analytic` set; numeric fallbacks may
/// return Inconclusive and never set `analytic`.
struct Membership {
    Tri value = Tri::Inconclusive;
    std::string reason;
    bool analytic = false;

    bool yes() const { return value == Tri::Yes; }
    bool no() const { return value == Tri::No; }
    bool decided() const { return value != Tri::Inconclusive; }

    static Membership exact(bool holds, std::string why) {
        return {holds ? Tri::Yes : Tri::No, std::move(why), true};
    }
    static Membership numeric(Tri value, std::string why) {
        return {value, std::move(why), false};
    }
};

}  // namespace fractrace
