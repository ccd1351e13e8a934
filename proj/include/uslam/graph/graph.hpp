#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "uslam/graph/factors.hpp"

namespace uslam {

/// One re-observation of an already-mapped landmark from a later state; the
/// loop-closure constraint of the estimator.
struct Reobservation {
    std::int64_t nav_index = 0;
    int camera_id = 0;
    std::int64_t landmark_id = 0;
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
};

class FactorGraph {
public:
    Values values;

    void add(std::shared_ptr<Factor> factor);
    const std::vector<std::shared_ptr<Factor>>& factors() const { return factors_; }
    std::size_t size() const { return factors_.size(); }

    void freeze(const VariableKey& key) { frozen_.insert(key); }
    void unfreeze(const VariableKey& key) { frozen_.erase(key); }
    bool is_frozen(const VariableKey& key) const { return frozen_.count(key) > 0; }
    const std::set<VariableKey>& frozen() const { return frozen_; }

    /// Rig used by loop-closure insertion and the extrinsic toggle.
    void set_rig(const RigCalibration& rig) { rig_ = rig; }
    const RigCalibration& rig() const;

    /// Appends reprojection factors binding current states to existing
    /// landmarks; creates no landmark variables. Throws UnknownLandmark.
    void add_loop_closure_observations(const std::vector<Reobservation>& reobservations,
                                       double sigma_px, double huber_delta = 0.0);

    /// Disabled (default): the camera's extrinsic stays frozen at its
    /// calibration value. Enabled: the variable is released with a weak prior
    /// at the current calibration estimate.
    void set_extrinsic_optimization(int camera_id, bool enabled, double prior_sigma_t = 0.05,
                                    double prior_sigma_r = 0.0349066 /* 2 deg */);

    std::map<std::string, int> factor_census() const;

private:
    std::vector<std::shared_ptr<Factor>> factors_;
    std::set<VariableKey> frozen_;
    std::optional<RigCalibration> rig_;
    std::map<int, std::shared_ptr<Factor>> extrinsic_priors_;
};

struct SolveOptions {
    double lambda0 = 1e-4;
    double lambda_up = 10.0;
    double lambda_down = 3.0;
    int max_iterations = 100;
    double relative_cost_tol = 1e-8;
    double step_tol = 1e-10;
    int rank_retries = 8;
    bool use_schur = true;  // off: dense full-system reference path
    bool verbose = false;
};

struct IterationStat {
    int iteration = 0;
    double cost = 0.0;  // cost after this iteration, over its active factor set
    double lambda = 0.0;
    double step_norm = 0.0;
    bool accepted = false;
    int skipped_factors = 0;
};

struct SolveReport {
    double initial_cost = 0.0;
    double final_cost = 0.0;
    int iterations = 0;
    std::vector<IterationStat> steps;
    std::string termination;
    std::map<std::string, int> factor_census;
    int skipped_total = 0;
    Values estimates;
};

/// Levenberg-Marquardt over the graph. Landmarks and the velocity/bias chain
/// are eliminated by Schur complement onto a dense pose/extrinsic core solved
/// with dense Cholesky. Multiplicative damping: diag *= (1 + lambda). Updates
/// graph.values in place. Throws GaugeUnfixed, RankDeficient, DivergedNaN.
SolveReport solve(FactorGraph& graph, const SolveOptions& options = {});

}  // namespace uslam
