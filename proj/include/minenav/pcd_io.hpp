#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "minenav/geometry.hpp"

namespace minenav {

class PcdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ASCII PCD subset: FIELDS x y z intensity, DATA ascii. The frame id is
// carried in a "# frame <name>" comment line and restored on read when
// present; the stamp likewise via "# stamp <seconds>".
void WritePcd(std::ostream& out, const PointCloud& cloud);
void WritePcd(const std::filesystem::path& path, const PointCloud& cloud);

PointCloud ReadPcd(std::istream& in);
PointCloud ReadPcd(const std::filesystem::path& path);

}  // namespace minenav
