#pragma once

#include <stdexcept>
#include <string_view>
#include <utility>
#include <variant>

namespace lightiot {

/// Why an honest party refused a message.
enum class Reject {
    StaleTimestamp,
    UnknownClient,
    UnknownGateway,
    BadAuthenticator,
    BadServerAuthenticator,
    KeyConfirmFailed,
    NotPaired,
    NoPendingRun,
    LengthMismatch,
};

std::string_view to_string(Reject r);

/// Value-or-reject result of a protocol step.
template <class T>
class Outcome {
public:
    Outcome(T value) : v_(std::move(value)) {}
    Outcome(Reject r) : v_(r) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    T& value() & {
        if (!ok()) throw std::logic_error("Outcome::value on reject");
        return std::get<T>(v_);
    }
    const T& value() const& {
        if (!ok()) throw std::logic_error("Outcome::value on reject");
        return std::get<T>(v_);
    }
    T&& value() && {
        if (!ok()) throw std::logic_error("Outcome::value on reject");
        return std::get<T>(std::move(v_));
    }
    Reject error() const {
        if (ok()) throw std::logic_error("Outcome::error on success");
        return std::get<Reject>(v_);
    }

    T* operator->() { return &value(); }
    const T* operator->() const { return &value(); }

private:
    std::variant<T, Reject> v_;
};

using Status = Outcome<std::monostate>;

inline Status accepted() { return Status(std::monostate{}); }

}  // namespace lightiot
