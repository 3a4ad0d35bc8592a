#ifndef CIV_ERROR_HPP
#define CIV_ERROR_HPP

#include <stdexcept>
#include <string>

namespace civ {

// Domain error with a stable machine-parsable code. The CLI prints
// "error: <code>: <message>" and exits with status 2.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const { return code_; }

private:
    std::string code_;
};

namespace errc {
inline constexpr const char* syntax = "syntax";
inline constexpr const char* cycle = "directed_cycle";
inline constexpr const char* duplicate_edge = "duplicate_edge";
inline constexpr const char* self_loop = "self_loop";
inline constexpr const char* unknown_node = "unknown_node";
inline constexpr const char* overlap = "overlapping_sets";
inline constexpr const char* invalid_tuple = "invalid_tuple";
inline constexpr const char* unreduced = "unreduced_graph";
inline constexpr const char* not_spd = "not_positive_definite";
inline constexpr const char* singular = "singular_block";
inline constexpr const char* weak_instrument = "weak_or_invalid_instrument";
inline constexpr const char* rank = "weak_or_collinear_design";
inline constexpr const char* cap = "cap_exceeded";
inline constexpr const char* precondition = "precondition_violation";
inline constexpr const char* io = "io";
}  // namespace errc

}  // namespace civ

#endif  // CIV_ERROR_HPP
