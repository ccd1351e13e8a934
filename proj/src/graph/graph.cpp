#include "uslam/graph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace uslam {

void FactorGraph::add(std::shared_ptr<Factor> factor) {
    for (const auto& key : factor->keys()) {
        if (!values.has(key)) {
            throw UnknownLandmark("factor references missing variable (kind " +
                                  std::to_string(static_cast<int>(key.kind)) + ", index " +
                                  std::to_string(key.index) + ")");
        }
    }
    factors_.push_back(std::move(factor));
}

const RigCalibration& FactorGraph::rig() const {
    if (!rig_) {
        throw InvalidSpec("graph has no rig calibration set");
    }
    return *rig_;
}

void FactorGraph::add_loop_closure_observations(const std::vector<Reobservation>& reobservations,
                                                double sigma_px, double huber_delta) {
    for (const auto& obs : reobservations) {
        if (!values.has(landmark_key(obs.landmark_id))) {
            throw UnknownLandmark("loop closure references landmark " +
                                  std::to_string(obs.landmark_id) + " which was never created");
        }
    }
    for (const auto& obs : reobservations) {
        const RigCamera& cam = rig().camera(obs.camera_id);
        auto factor = std::make_shared<ReprojectionFactor>(obs.nav_index, obs.landmark_id,
                                                           obs.camera_id, cam.intrinsics,
                                                           obs.pixel, sigma_px);
        if (huber_delta > 0.0) {
            factor->set_robust(huber_delta);
        }
        add(std::move(factor));
    }
}

void FactorGraph::set_extrinsic_optimization(int camera_id, bool enabled, double prior_sigma_t,
                                             double prior_sigma_r) {
    const VariableKey key = extrinsic_key(camera_id);
    if (!values.has(key)) {
        throw UnknownCamera("no extrinsic variable for camera " + std::to_string(camera_id));
    }
    if (!enabled) {
        freeze(key);
        auto it = extrinsic_priors_.find(camera_id);
        if (it != extrinsic_priors_.end()) {
            factors_.erase(std::remove(factors_.begin(), factors_.end(), it->second),
                           factors_.end());
            extrinsic_priors_.erase(it);
        }
        return;
    }
    unfreeze(key);
    if (extrinsic_priors_.count(camera_id) == 0) {
        Eigen::VectorXd sigmas(6);
        sigmas << prior_sigma_t, prior_sigma_t, prior_sigma_t,
                  prior_sigma_r, prior_sigma_r, prior_sigma_r;
        auto prior = std::make_shared<PriorPoseFactor>(key, values.extrinsic(camera_id), sigmas);
        extrinsic_priors_[camera_id] = prior;
        add(std::move(prior));
    }
}

std::map<std::string, int> FactorGraph::factor_census() const {
    std::map<std::string, int> census;
    for (const auto& f : factors_) {
        ++census[f->kind()];
    }
    return census;
}

namespace {

struct Layout {
    // Reduced block: non-frozen nav states and extrinsics. Landmarks are
    // eliminated separately.
    std::map<VariableKey, int> reduced_offset;
    std::map<VariableKey, int> landmark_slot;
    std::vector<VariableKey> reduced_keys;
    std::vector<VariableKey> landmark_keys;
    int reduced_dim = 0;

    // The reduced dimensions split into P (pose and extrinsic, densely
    // coupled once landmarks are eliminated) and V (velocity and bias,
    // coupled only along the inertial chain). Exactly one of pose_of[i],
    // velbias_of[i] is >= 0 for each reduced dimension i.
    std::vector<int> pose_of;
    std::vector<int> velbias_of;
    int pose_dim = 0;
    int velbias_dim = 0;

    static Layout build(const FactorGraph& graph) {
        Layout l;
        for (const auto& key : graph.values.keys()) {
            if (graph.is_frozen(key)) continue;
            if (key.kind == VariableKind::Landmark) {
                l.landmark_slot[key] = static_cast<int>(l.landmark_keys.size());
                l.landmark_keys.push_back(key);
            } else {
                l.reduced_offset[key] = l.reduced_dim;
                l.reduced_keys.push_back(key);
                l.reduced_dim += tangent_dim(key.kind);
            }
        }
        l.pose_of.assign(l.reduced_dim, -1);
        l.velbias_of.assign(l.reduced_dim, -1);
        for (const auto& key : l.reduced_keys) {
            const int off = l.reduced_offset.at(key);
            const int dim = tangent_dim(key.kind);
            const int pose_part = key.kind == VariableKind::NavState ? 6 : dim;
            for (int d = 0; d < dim; ++d) {
                if (d < pose_part) {
                    l.pose_of[off + d] = l.pose_dim++;
                } else {
                    l.velbias_of[off + d] = l.velbias_dim++;
                }
            }
        }
        return l;
    }
};

struct LinearSystem {
    // Stored in split form. P-blocks are dense: landmark elimination fills
    // them in almost completely on surveys that revisit ground, and dense
    // algebra is far cheaper there than a sparse solver on a dense pattern.
    // V-blocks stay sparse (inertial chain plus priors).
    Eigen::MatrixXd H_pp;               // P x P
    Eigen::SparseMatrix<double> H_pv;   // P x V
    Eigen::SparseMatrix<double> H_vv;   // V x V
    Eigen::MatrixXd H_pl;               // P x (3 * n_landmarks)
    Eigen::SparseMatrix<double> H_vl;   // V x (3 * n_landmarks), normally empty
    std::vector<Eigen::Matrix3d> H_ll;  // per-landmark diagonal blocks
    Eigen::VectorXd g_p;
    Eigen::VectorXd g_v;
    Eigen::VectorXd g_l;
    // No current factor couples a landmark to velocity or bias; if one ever
    // does, the structured elimination below no longer applies.
    bool has_vl = false;
};

bool factor_invalid(const Error& e) {
    return std::string(e.kind()) == "PointBehindCamera" || std::string(e.kind()) == "InvalidResidual";
}

double robust_cost(const Factor& f, const Values& v) { return f.cost(v); }

// Cost of the given factor subset; +inf when any factor becomes invalid so
// the candidate step is rejected rather than silently reweighted.
double active_cost(const std::vector<const Factor*>& active, const Values& v) {
    double c = 0.0;
    for (const Factor* f : active) {
        try {
            c += robust_cost(*f, v);
        } catch (const Error& e) {
            if (factor_invalid(e)) return std::numeric_limits<double>::infinity();
            throw;
        }
    }
    return c;
}

LinearSystem assemble(const Layout& layout, const std::vector<const Factor*>& active,
                      const std::vector<Factor::Linearization>& lins) {
    LinearSystem sys;
    const int np = layout.pose_dim;
    const int nv = layout.velbias_dim;
    const int nl = static_cast<int>(layout.landmark_keys.size());
    sys.H_pp = Eigen::MatrixXd::Zero(np, np);
    sys.H_pl = Eigen::MatrixXd::Zero(np, 3 * nl);
    sys.g_p = Eigen::VectorXd::Zero(np);
    sys.g_v = Eigen::VectorXd::Zero(nv);
    sys.g_l = Eigen::VectorXd::Zero(3 * nl);
    sys.H_ll.assign(nl, Eigen::Matrix3d::Zero());

    std::vector<Eigen::Triplet<double>> t_pv, t_vv, t_vl;

    // Exact zeros are dropped so the sparse patterns reflect the true
    // coupling (vision touches only the pose part of a nav state).
    const auto add_rr = [&](int i, int j, double v) {
        const int pi = layout.pose_of[i];
        const int pj = layout.pose_of[j];
        if (pi >= 0 && pj >= 0) {
            sys.H_pp(pi, pj) += v;
        } else if (pi >= 0) {
            t_pv.emplace_back(pi, layout.velbias_of[j], v);
        } else if (pj >= 0) {
            // Mirror of a P-V entry that is routed separately.
        } else {
            t_vv.emplace_back(layout.velbias_of[i], layout.velbias_of[j], v);
        }
    };
    const auto add_rl = [&](int i, int lcol, double v) {
        const int pi = layout.pose_of[i];
        if (pi >= 0) {
            sys.H_pl(pi, lcol) += v;
        } else {
            t_vl.emplace_back(layout.velbias_of[i], lcol, v);
            sys.has_vl = true;
        }
    };

    for (std::size_t fi = 0; fi < active.size(); ++fi) {
        const auto& keys = active[fi]->keys();
        const auto& lin = lins[fi];
        for (std::size_t a = 0; a < keys.size(); ++a) {
            const auto ra = layout.reduced_offset.find(keys[a]);
            const auto la = layout.landmark_slot.find(keys[a]);
            const bool a_reduced = ra != layout.reduced_offset.end();
            const bool a_landmark = la != layout.landmark_slot.end();
            if (!a_reduced && !a_landmark) continue;  // frozen

            const Eigen::MatrixXd& Ja = lin.jacobians[a];
            const Eigen::VectorXd ga = -Ja.transpose() * lin.residual;
            if (a_reduced) {
                for (int d = 0; d < ga.size(); ++d) {
                    const int i = ra->second + d;
                    const int pi = layout.pose_of[i];
                    if (pi >= 0) {
                        sys.g_p(pi) += ga(d);
                    } else {
                        sys.g_v(layout.velbias_of[i]) += ga(d);
                    }
                }
            } else {
                sys.g_l.segment(3 * la->second, 3) += ga;
            }

            for (std::size_t b = a; b < keys.size(); ++b) {
                const auto rb = layout.reduced_offset.find(keys[b]);
                const auto lb = layout.landmark_slot.find(keys[b]);
                const bool b_reduced = rb != layout.reduced_offset.end();
                const bool b_landmark = lb != layout.landmark_slot.end();
                if (!b_reduced && !b_landmark) continue;

                const Eigen::MatrixXd Hab = Ja.transpose() * lin.jacobians[b];
                if (a_reduced && b_reduced) {
                    for (int r = 0; r < Hab.rows(); ++r)
                        for (int c = 0; c < Hab.cols(); ++c) {
                            const double v = Hab(r, c);
                            if (v == 0.0) continue;
                            add_rr(ra->second + r, rb->second + c, v);
                            if (a != b) add_rr(rb->second + c, ra->second + r, v);
                        }
                } else if (a_reduced && b_landmark) {
                    for (int r = 0; r < Hab.rows(); ++r)
                        for (int c = 0; c < 3; ++c) {
                            const double v = Hab(r, c);
                            if (v != 0.0) add_rl(ra->second + r, 3 * lb->second + c, v);
                        }
                } else if (a_landmark && b_reduced) {
                    for (int r = 0; r < 3; ++r)
                        for (int c = 0; c < Hab.cols(); ++c) {
                            const double v = Hab(r, c);
                            if (v != 0.0) add_rl(rb->second + c, 3 * la->second + r, v);
                        }
                } else {
                    // A factor touches at most one landmark, so this is the
                    // same landmark on both sides.
                    sys.H_ll[la->second] += Hab;
                }
            }
        }
    }
    sys.H_pv.resize(np, nv);
    sys.H_pv.setFromTriplets(t_pv.begin(), t_pv.end());
    sys.H_vv.resize(nv, nv);
    sys.H_vv.setFromTriplets(t_vv.begin(), t_vv.end());
    sys.H_vl.resize(nv, 3 * nl);
    sys.H_vl.setFromTriplets(t_vl.begin(), t_vl.end());
    return sys;
}

// One damped solve. Returns false when the damped system is not positive
// definite (caller boosts lambda and retries).
//
// Structured path: eliminate the landmark blocks and the velocity/bias
// chain onto the pose core, factor the core with a dense Cholesky, then
// back-substitute. Elimination order is valid because landmarks never
// couple to V and both eliminations target P only.
bool solve_damped(const LinearSystem& sys, const Layout& layout, double lambda, bool use_schur,
                  Eigen::VectorXd* delta_r, Eigen::VectorXd* delta_l) {
    const int nr = layout.reduced_dim;
    const int np = layout.pose_dim;
    const int nv = layout.velbias_dim;
    const int nl = static_cast<int>(layout.landmark_keys.size());
    const double scale = 1.0 + lambda;

    if (use_schur && !sys.has_vl) {
        // Damp diagonals; an exact zero is a structurally unconstrained
        // dimension that no amount of multiplicative damping can fix.
        Eigen::MatrixXd A = sys.H_pp;
        for (int i = 0; i < np; ++i) {
            if (A(i, i) == 0.0) return false;
            A(i, i) *= scale;
        }
        Eigen::SparseMatrix<double> C = sys.H_vv;
        for (int i = 0; i < nv; ++i) {
            const double d = C.coeff(i, i);
            if (d == 0.0) return false;
            C.coeffRef(i, i) = d * scale;
        }

        // Factor damped landmark blocks and fold them into the pose core.
        // With B_j = L_j L_j^T the fill H_pl B^-1 H_pl^T becomes U U^T for
        // U_j = H_pl_j L_j^-T, a symmetric rank update at half the flops.
        // Only the lower triangle of A is maintained from here on.
        Eigen::VectorXd gp = sys.g_p;
        std::vector<Eigen::LLT<Eigen::Matrix3d>> lm_llt(nl);
        for (int j = 0; j < nl; ++j) {
            Eigen::Matrix3d B = sys.H_ll[j];
            B.diagonal() *= scale;
            lm_llt[j].compute(B);
            if (lm_llt[j].info() != Eigen::Success) return false;
        }
        if (nl > 0) {
            Eigen::MatrixXd U(np, 3 * nl);
            Eigen::VectorXd w(3 * nl);
            for (int j = 0; j < nl; ++j) {
                const auto L = lm_llt[j].matrixL();
                U.middleCols<3>(3 * j) =
                    L.solve(sys.H_pl.middleCols<3>(3 * j).transpose()).transpose();
                w.segment<3>(3 * j) = L.solve(sys.g_l.segment<3>(3 * j));
            }
            A.selfadjointView<Eigen::Lower>().rankUpdate(U, -1.0);
            gp.noalias() -= U * w;
        }

        // Fold in the velocity/bias chain.
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> chol_v;
        if (nv > 0) {
            chol_v.compute(C);
            if (chol_v.info() != Eigen::Success) return false;
            const Eigen::MatrixXd X = chol_v.solve(Eigen::MatrixXd(sys.H_pv.transpose()));
            A.noalias() -= sys.H_pv * X;
            gp.noalias() -= sys.H_pv * chol_v.solve(sys.g_v);
        }

        Eigen::LLT<Eigen::MatrixXd> llt_p(A);
        if (llt_p.info() != Eigen::Success) return false;
        const Eigen::VectorXd dp = llt_p.solve(gp);
        if (!dp.allFinite()) return false;

        Eigen::VectorXd dv(nv);
        if (nv > 0) {
            dv = chol_v.solve(sys.g_v - sys.H_pv.transpose() * dp);
            if (!dv.allFinite()) return false;
        }

        delta_l->resize(3 * nl);
        if (nl > 0) {
            const Eigen::VectorXd rhs = sys.g_l - sys.H_pl.transpose() * dp;
            for (int j = 0; j < nl; ++j) {
                delta_l->segment<3>(3 * j) = lm_llt[j].solve(rhs.segment<3>(3 * j));
            }
        }
        delta_r->resize(nr);
        for (int i = 0; i < nr; ++i) {
            const int pi = layout.pose_of[i];
            (*delta_r)(i) = pi >= 0 ? dp(pi) : dv(layout.velbias_of[i]);
        }
        return delta_l->allFinite();
    }

    // Dense reference path over the full system, ordered P, V, landmarks.
    const int n = np + nv + 3 * nl;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    H.topLeftCorner(np, np) = sys.H_pp;
    H.block(0, np, np, nv) = Eigen::MatrixXd(sys.H_pv);
    H.block(np, 0, nv, np) = Eigen::MatrixXd(sys.H_pv).transpose();
    H.block(np, np, nv, nv) = Eigen::MatrixXd(sys.H_vv);
    H.block(0, np + nv, np, 3 * nl) = sys.H_pl;
    H.block(np + nv, 0, 3 * nl, np) = sys.H_pl.transpose();
    H.block(np, np + nv, nv, 3 * nl) = Eigen::MatrixXd(sys.H_vl);
    H.block(np + nv, np, 3 * nl, nv) = Eigen::MatrixXd(sys.H_vl).transpose();
    for (int j = 0; j < nl; ++j) {
        H.block<3, 3>(np + nv + 3 * j, np + nv + 3 * j) = sys.H_ll[j];
    }
    for (int i = 0; i < n; ++i) {
        if (H(i, i) == 0.0) return false;
        H(i, i) *= scale;
    }
    Eigen::VectorXd g(n);
    g << sys.g_p, sys.g_v, sys.g_l;

    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::VectorXd delta = llt.solve(g);
    if (!delta.allFinite()) return false;
    delta_r->resize(nr);
    for (int i = 0; i < nr; ++i) {
        const int pi = layout.pose_of[i];
        (*delta_r)(i) = pi >= 0 ? delta(pi) : delta(np + layout.velbias_of[i]);
    }
    *delta_l = delta.tail(3 * nl);
    return true;
}

void apply_step(const Layout& layout, const Eigen::VectorXd& delta_r,
                const Eigen::VectorXd& delta_l, Values* values) {
    for (const auto& key : layout.reduced_keys) {
        const int off = layout.reduced_offset.at(key);
        values->retract_in_place(key, delta_r.segment(off, tangent_dim(key.kind)));
    }
    for (std::size_t j = 0; j < layout.landmark_keys.size(); ++j) {
        values->retract_in_place(layout.landmark_keys[j], delta_l.segment(3 * j, 3));
    }
}

}  // namespace

SolveReport solve(FactorGraph& graph, const SolveOptions& options) {
    // Gauge: at least one frozen nav state or a pose-fixing prior on one.
    bool gauge_fixed = false;
    for (const auto& key : graph.frozen()) {
        if (key.kind == VariableKind::NavState) gauge_fixed = true;
    }
    for (const auto& f : graph.factors()) {
        if ((f->kind() == "prior_pose" || f->kind() == "prior_nav_state") &&
            f->keys()[0].kind == VariableKind::NavState) {
            gauge_fixed = true;
        }
    }
    if (!gauge_fixed) {
        throw GaugeUnfixed("no frozen nav state and no pose prior");
    }

    // Every free landmark needs at least two observations.
    std::map<std::int64_t, int> obs_count;
    for (const auto& f : graph.factors()) {
        for (const auto& key : f->keys()) {
            if (key.kind == VariableKind::Landmark) ++obs_count[key.index];
        }
    }
    for (const auto& [index, point] : graph.values.landmarks()) {
        if (graph.is_frozen(landmark_key(index))) continue;
        if (obs_count[index] < 2) {
            throw RankDeficient("landmark " + std::to_string(index) + " has " +
                                std::to_string(obs_count[index]) + " observation(s)");
        }
    }

    const Layout layout = Layout::build(graph);

    SolveReport report;
    report.factor_census = graph.factor_census();

    // Linearize at the current estimate; invalid factors sit out one round.
    std::vector<const Factor*> active;
    std::vector<Factor::Linearization> lins;
    int skipped = 0;
    auto relinearize = [&]() -> double {
        active.clear();
        lins.clear();
        skipped = 0;
        double c = 0.0;
        for (const auto& f : graph.factors()) {
            try {
                auto lin = f->linearize(graph.values);
                if (!lin.residual.allFinite()) {
                    throw DivergedNaN("non-finite residual in factor kind " + f->kind());
                }
                for (const auto& Jm : lin.jacobians) {
                    if (!Jm.allFinite()) {
                        throw DivergedNaN("non-finite jacobian in factor kind " + f->kind());
                    }
                }
                c += lin.cost;
                active.push_back(f.get());
                lins.push_back(std::move(lin));
            } catch (const Error& e) {
                if (factor_invalid(e)) {
                    ++skipped;
                    continue;
                }
                throw;
            }
        }
        return c;
    };

    double cost = relinearize();
    if (!std::isfinite(cost)) {
        throw DivergedNaN("non-finite initial cost");
    }
    report.initial_cost = cost;
    report.skipped_total = skipped;

    double lambda = options.lambda0;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const LinearSystem sys = assemble(layout, active, lins);

        Eigen::VectorXd delta_r, delta_l;
        bool solved = false;
        double try_lambda = lambda;
        for (int attempt = 0; attempt <= options.rank_retries; ++attempt) {
            if (solve_damped(sys, layout, try_lambda, options.use_schur, &delta_r, &delta_l)) {
                solved = true;
                break;
            }
            try_lambda *= options.lambda_up;
        }
        if (!solved) {
            throw RankDeficient("normal equations not positive definite after " +
                                std::to_string(options.rank_retries + 1) + " damping retries");
        }
        lambda = try_lambda;

        const double step_norm = std::sqrt(delta_r.squaredNorm() + delta_l.squaredNorm());
        if (step_norm < options.step_tol) {
            report.steps.push_back({it, cost, lambda, step_norm, false, skipped});
            report.iterations = it;
            report.termination = "step_tolerance";
            break;
        }

        Values candidate = graph.values;
        apply_step(layout, delta_r, delta_l, &candidate);
        const double candidate_cost = active_cost(active, candidate);
        if (std::isnan(candidate_cost)) {
            throw DivergedNaN("candidate cost is NaN");
        }

        if (candidate_cost < cost) {
            graph.values = std::move(candidate);
            const double drop = cost - candidate_cost;
            const double rel = drop / std::max(cost, 1e-300);
            report.steps.push_back({it, candidate_cost, lambda, step_norm, true, skipped});
            lambda = std::max(lambda / options.lambda_down, 1e-12);
            cost = relinearize();
            report.iterations = it;
            if (rel < options.relative_cost_tol) {
                report.termination = "relative_cost";
                break;
            }
        } else {
            report.steps.push_back({it, cost, lambda, step_norm, false, skipped});
            lambda *= options.lambda_up;
            report.iterations = it;
            if (lambda > 1e32) {
                report.termination = "lambda_overflow";
                break;
            }
        }
        if (options.verbose) {
            const auto& s = report.steps.back();
            std::fprintf(stderr, "lm iter %3d cost %.6e lambda %.1e step %.3e %s\n", s.iteration,
                         s.cost, s.lambda, s.step_norm, s.accepted ? "accept" : "reject");
        }
    }
    if (report.termination.empty()) {
        report.termination = "max_iterations";
    }

    report.final_cost = cost;
    report.skipped_total = skipped;
    report.estimates = graph.values;
    return report;
}

}  // namespace uslam
