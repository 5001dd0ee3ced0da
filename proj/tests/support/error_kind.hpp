#pragma once

#include <optional>
#include <string>

#include "conrad/error.hpp"

namespace testing_support {

/// Kind of the conrad::Error thrown by `f`, or nullopt when it returns normally.
template <typename F>
std::optional<conrad::ErrorKind> thrown_kind(F&& f) {
    try {
        f();
    } catch (const conrad::Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

/// Message of the conrad::Error thrown by `f`, or empty.
template <typename F>
std::string thrown_message(F&& f) {
    try {
        f();
    } catch (const conrad::Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace testing_support
