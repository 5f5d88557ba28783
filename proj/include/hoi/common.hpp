#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace hoi {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec45 = Eigen::Matrix<double, 45, 1>;
using Face = std::array<int, 3>;

/// Bad user-supplied data: malformed files, violated preconditions.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller broke an operation's contract (e.g. non-watertight mesh where one is required).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Something failed while running (I/O, numerical breakdown).
class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Number of worker threads for bulk kernels. Capped by HOI_ALIGN_THREADS.
int worker_threads();

/// Runs fn(i) for i in [0, n). Indices are split into contiguous chunks, one per
/// worker; fn must only write state owned by index i so results are schedule-free.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Whole-file read; InputError if the file cannot be opened.
std::string read_file(const std::string& path);

/// Writes to a sibling temp file then renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& bytes);

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace hoi
