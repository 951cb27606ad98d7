#pragma once

#include <stdexcept>
#include <string>

namespace ervs {

enum class Errc {
  invalid_argument,
  invalid_geometry,
  point_behind_camera,
  epipole_at_infinity,
  collinear_degenerate,
  near_parallel_rays,
  parallel_rays,
  no_valid_baseline,
  isolated_view,
  point_at_camera_plane,
  length_mismatch,
  parse_error,
  format_error,
  io_error,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_geometry: return "invalid-geometry";
    case Errc::point_behind_camera: return "point-behind-camera";
    case Errc::epipole_at_infinity: return "epipole-at-infinity";
    case Errc::collinear_degenerate: return "collinear-degenerate";
    case Errc::near_parallel_rays: return "near-parallel-rays";
    case Errc::parallel_rays: return "parallel-rays";
    case Errc::no_valid_baseline: return "no-valid-baseline";
    case Errc::isolated_view: return "isolated-view";
    case Errc::point_at_camera_plane: return "point-at-camera-plane";
    case Errc::length_mismatch: return "length-mismatch";
    case Errc::parse_error: return "parse-error";
    case Errc::format_error: return "format-error";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

/// Domain error carrying a machine-readable code. The message is prefixed
/// with the code name, e.g. "isolated-view: view 3 has no finite entries".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ervs
