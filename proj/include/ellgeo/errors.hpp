#pragma once

#include <stdexcept>
#include <string>

namespace ellgeo {

enum class ErrorCode {
    invalid_spec,
    off_leaf,
    degenerate_point,
    degenerate_axes,
    wrong_symmetry,
    projection_failed,
    contour_failed,
    coordinate_singularity,
    leaf_incompatible,
    outside_image,
    pole_hit,
    axis_point,
    not_on_subflow,
    pole_collision,
    zero_momentum,
    non_integer_transition,
    loop_outside_image,
    not_parabolic,
    domain_error,
    band_collapsed,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::invalid_spec: return "invalid_spec";
        case ErrorCode::off_leaf: return "off_leaf";
        case ErrorCode::degenerate_point: return "degenerate_point";
        case ErrorCode::degenerate_axes: return "degenerate_axes";
        case ErrorCode::wrong_symmetry: return "wrong_symmetry";
        case ErrorCode::projection_failed: return "projection_failed";
        case ErrorCode::contour_failed: return "contour_failed";
        case ErrorCode::coordinate_singularity: return "coordinate_singularity";
        case ErrorCode::leaf_incompatible: return "leaf_incompatible";
        case ErrorCode::outside_image: return "outside_image";
        case ErrorCode::pole_hit: return "pole_hit";
        case ErrorCode::axis_point: return "axis_point";
        case ErrorCode::not_on_subflow: return "not_on_subflow";
        case ErrorCode::pole_collision: return "pole_collision";
        case ErrorCode::zero_momentum: return "zero_momentum";
        case ErrorCode::non_integer_transition: return "non_integer_transition";
        case ErrorCode::loop_outside_image: return "loop_outside_image";
        case ErrorCode::not_parabolic: return "not_parabolic";
        case ErrorCode::domain_error: return "domain_error";
        case ErrorCode::band_collapsed: return "band_collapsed";
    }
    return "unknown";
}

// Failures of an iteration or of integer assembly, as opposed to bad input.
inline bool is_numerical(ErrorCode c) {
    return c == ErrorCode::projection_failed || c == ErrorCode::contour_failed ||
           c == ErrorCode::non_integer_transition || c == ErrorCode::pole_collision;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace ellgeo
