#include "uslam/io/associate.hpp"

#include <algorithm>
#include <cstdlib>

namespace uslam {
namespace {

// Index of the state nearest to t within tolerance, ties to the earlier
// state; -1 outside the tolerance.
int nearest_state(const std::vector<Timestamp>& times, Timestamp t, Timestamp tolerance) {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    int best = -1;
    Timestamp best_dt = tolerance + 1;
    if (it != times.begin()) {
        const int i = static_cast<int>(it - times.begin()) - 1;
        best_dt = t - times[i];
        best = i;
    }
    if (it != times.end()) {
        const Timestamp dt = *it - t;
        if (dt < best_dt) {
            best_dt = dt;
            best = static_cast<int>(it - times.begin());
        }
    }
    return best_dt <= tolerance ? best : -1;
}

ImuSample interpolate(const ImuSample& a, const ImuSample& b, Timestamp t) {
    const double alpha = static_cast<double>(t - a.t) / static_cast<double>(b.t - a.t);
    ImuSample s;
    s.t = t;
    s.gyro = a.gyro + alpha * (b.gyro - a.gyro);
    s.accel = a.accel + alpha * (b.accel - a.accel);
    return s;
}

}  // namespace

std::vector<StateBundle> associate(const std::vector<LogRecord>& records,
                                   const std::vector<Timestamp>& state_times,
                                   const AssociationOptions& options,
                                   AssociationReport* report) {
    for (std::size_t i = 1; i < state_times.size(); ++i) {
        if (state_times[i] <= state_times[i - 1]) {
            throw NonMonotonicTimestamps("state times must strictly increase");
        }
    }
    AssociationReport local;
    AssociationReport& rep = report != nullptr ? *report : local;
    rep = AssociationReport{};

    std::vector<StateBundle> bundles(state_times.size());
    for (std::size_t i = 0; i < state_times.size(); ++i) bundles[i].t = state_times[i];

    std::vector<ImuSample> imu_stream;
    for (const auto& record : records) {
        if (const auto* imu = std::get_if<ImuSample>(&record)) {
            imu_stream.push_back(*imu);
        } else if (const auto* dvl = std::get_if<DvlSample>(&record)) {
            const int i = nearest_state(state_times, dvl->t, options.tolerance);
            if (i >= 0) {
                bundles[i].dvl.push_back(*dvl);
            } else {
                ++rep.unassociated_dvl;
            }
        } else if (const auto* depth = std::get_if<DepthSample>(&record)) {
            const int i = nearest_state(state_times, depth->t, options.tolerance);
            if (i >= 0) {
                bundles[i].depth.push_back(*depth);
            } else {
                ++rep.unassociated_depth;
            }
        } else {
            const auto& frame = std::get<CameraFrame>(record);
            const auto it =
                std::lower_bound(state_times.begin(), state_times.end(), frame.t);
            if (it != state_times.end() && *it == frame.t) {
                bundles[it - state_times.begin()].frames.push_back(frame);
            } else {
                ++rep.unassociated_camera;
            }
        }
    }

    // Half-open partition: batch k holds raw samples in [T_k, T_{k+1}).
    // Samples before the first state or at/after the last have no interval.
    for (std::size_t s = 0; s < imu_stream.size(); ++s) {
        const ImuSample& sample = imu_stream[s];
        const auto it =
            std::upper_bound(state_times.begin(), state_times.end(), sample.t);
        if (it == state_times.begin() || it == state_times.end()) {
            ++rep.unassociated_imu;
            continue;
        }
        bundles[it - state_times.begin() - 1].imu.push_back(sample);
        ++rep.imu_in;
    }

    // Open each batch exactly at its state time; the neighbor before the
    // boundary exists in the raw stream whenever interpolation is possible.
    for (std::size_t k = 0; k + 1 < bundles.size(); ++k) {
        StateBundle& b = bundles[k];
        if (b.imu.empty() || b.imu.front().t == b.t) continue;
        const auto next = std::lower_bound(
            imu_stream.begin(), imu_stream.end(), b.t,
            [](const ImuSample& s, Timestamp t) { return s.t < t; });
        if (next == imu_stream.begin()) continue;
        b.imu.insert(b.imu.begin(), interpolate(*(next - 1), *next, b.t));
        b.first_imu_synthetic = true;
        ++rep.imu_synthetic;
    }

    for (const auto& b : bundles) rep.imu_out += static_cast<int>(b.imu.size());
    return bundles;
}

}  // namespace uslam
