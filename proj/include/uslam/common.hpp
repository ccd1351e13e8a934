#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace uslam {

using Timestamp = std::int64_t;  // nanoseconds

constexpr double kNsPerSec = 1e9;

inline double to_seconds(Timestamp t) { return static_cast<double>(t) / kNsPerSec; }
inline Timestamp to_nanoseconds(double sec) {
    return static_cast<Timestamp>(sec * kNsPerSec + (sec >= 0 ? 0.5 : -0.5));
}

// World frame is NED-like: x north, y east, z down. Depth is +z.
constexpr double kGravityMagnitude = 9.81;

class Error : public std::runtime_error {
public:
    Error(const std::string& kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(kind) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define USLAM_DEFINE_ERROR(Name)                                      \
    class Name : public Error {                                       \
    public:                                                           \
        explicit Name(const std::string& what) : Error(#Name, what) {} \
    }

// geometry
USLAM_DEFINE_ERROR(PointBehindCamera);
USLAM_DEFINE_ERROR(UnknownCamera);
USLAM_DEFINE_ERROR(PixelOutOfBounds);
USLAM_DEFINE_ERROR(DegenerateGeometry);

// sensors
USLAM_DEFINE_ERROR(EmptyBatch);
USLAM_DEFINE_ERROR(NonMonotonicTimestamps);

// graph / solver
USLAM_DEFINE_ERROR(InvalidResidual);
USLAM_DEFINE_ERROR(GaugeUnfixed);
USLAM_DEFINE_ERROR(RankDeficient);
USLAM_DEFINE_ERROR(DivergedNaN);
USLAM_DEFINE_ERROR(UnknownLandmark);

// simulator
USLAM_DEFINE_ERROR(InvalidSpec);
USLAM_DEFINE_ERROR(InvalidRates);

// io
USLAM_DEFINE_ERROR(ParseError);
USLAM_DEFINE_ERROR(SchemaError);
USLAM_DEFINE_ERROR(NonOrthonormalRotation);
USLAM_DEFINE_ERROR(NonFinitePoint);

// semantics
USLAM_DEFINE_ERROR(DimensionMismatch);
USLAM_DEFINE_ERROR(UnknownClassId);
USLAM_DEFINE_ERROR(EmptyGroundTruth);

// eval
USLAM_DEFINE_ERROR(InsufficientOverlap);
USLAM_DEFINE_ERROR(DegenerateConfiguration);
USLAM_DEFINE_ERROR(InsufficientSpan);

#undef USLAM_DEFINE_ERROR

}  // namespace uslam
