#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace citecheck {

/// Error payload carried by Expected when an operation declines its input.
struct Error {
    std::string code;
    std::string message;
};

/// Minimal value-or-error holder, shaped after std::expected.
template <class T>
class Expected {
public:
    Expected(T value) : state_(std::move(value)) {}
    Expected(Error error) : state_(std::move(error)) {}

    bool has_value() const noexcept { return state_.index() == 0; }
    explicit operator bool() const noexcept { return has_value(); }

    const T& value() const& {
        if (!has_value()) throw std::logic_error("Expected::value on error: " + error().message);
        return std::get<0>(state_);
    }
    T&& value() && {
        if (!has_value()) throw std::logic_error("Expected::value on error: " + error().message);
        return std::get<0>(std::move(state_));
    }
    const T& operator*() const& { return value(); }
    const T* operator->() const { return &value(); }

    const Error& error() const& { return std::get<1>(state_); }

private:
    std::variant<T, Error> state_;
};

inline Error make_error(std::string code, std::string message) {
    return Error{std::move(code), std::move(message)};
}

}  // namespace citecheck
