#include "arisim/recovery.hpp"

#include <cmath>

#include "arisim/errors.hpp"
#include "arisim/geometry.hpp"

namespace arisim {

AngleGrid make_angle_grid(int num_hor, int num_ver, const SensingLayout& layout) {
    if (num_hor < 1 || num_ver < 1)
        throw config_error("angle grid must have at least one point per axis");
    AngleGrid grid;
    grid.layout = layout;
    grid.hor = VectorXd::LinSpaced(num_hor, 0.0, M_PI * (num_hor - 1) / num_hor);
    grid.ver = VectorXd::LinSpaced(num_ver, 0.0, M_PI * (num_ver - 1) / num_ver);
    if (num_hor == 1)
        grid.hor[0] = M_PI / 2.0;
    if (num_ver == 1)
        grid.ver[0] = M_PI / 2.0;

    const Eigen::Index g_total = static_cast<Eigen::Index>(num_hor) * num_ver;
    grid.full_atoms.resize(layout.aperture(), g_total);
    grid.partial_atoms.resize(layout.count(), g_total);
    for (int ih = 0; ih < num_hor; ++ih) {
        for (int iv = 0; iv < num_ver; ++iv) {
            const Eigen::Index g = static_cast<Eigen::Index>(ih) * num_ver + iv;
            grid.full_atoms.col(g) =
                upa_response(grid.hor[ih], grid.ver[iv], layout.n_hor, layout.n_ver);
            for (int i = 0; i < layout.count(); ++i)
                grid.partial_atoms(i, g) =
                    grid.full_atoms(layout.indices[static_cast<size_t>(i)], g);
        }
    }
    return grid;
}

MatrixXcd sample_autocorrelation(std::span<const VectorXcd> snapshots) {
    if (snapshots.empty())
        throw config_error("autocorrelation needs at least one snapshot");
    const Eigen::Index n = snapshots.front().size();
    MatrixXcd r = MatrixXcd::Zero(n, n);
    for (const auto& y : snapshots) {
        if (y.size() != n)
            throw config_error("autocorrelation: inconsistent snapshot length");
        r.noalias() += y * y.adjoint();
    }
    return r / static_cast<double>(snapshots.size());
}

OmpResult omp_angles(const MatrixXcd& R, const AngleGrid& grid, int num_paths) {
    if (num_paths < 1)
        throw config_error("omp_angles: path count must be >= 1");
    if (num_paths > grid.layout.count())
        throw config_error("omp_angles: more paths than sensing elements, unresolvable");
    if (R.rows() != grid.layout.count() || R.cols() != grid.layout.count())
        throw config_error("omp_angles: autocorrelation size does not match the layout");

    OmpResult result;
    if (R.norm() == 0.0) {
        result.zero_energy = true;
        return result;
    }

    const Eigen::Index m = grid.layout.count();
    const double atom_norm2 = static_cast<double>(m); // unit-modulus entries
    std::vector<VectorXcd> basis;                     // orthonormal span of selected atoms
    std::vector<char> taken(static_cast<size_t>(grid.size()), 0);

    for (int it = 0; it < num_paths; ++it) {
        // deflate: R~ = P R P with P = I - Q Q^H
        MatrixXcd deflated = R;
        for (const auto& q : basis) {
            deflated -= q * (q.adjoint() * deflated);
            deflated -= (deflated * q) * q.adjoint();
        }

        // score every atom at once: diag(A^H R~ A)
        const MatrixXcd ra = deflated * grid.partial_atoms;
        const VectorXd scores =
            grid.partial_atoms.conjugate().cwiseProduct(ra).colwise().sum().real().transpose() /
            atom_norm2;

        Eigen::Index best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (Eigen::Index g = 0; g < scores.size(); ++g) {
            if (taken[static_cast<size_t>(g)])
                continue;
            if (scores[g] > best_score) {
                best_score = scores[g];
                best = g;
            }
        }
        if (best < 0)
            throw numeric_error("omp_angles: dictionary exhausted");

        taken[static_cast<size_t>(best)] = 1;
        result.atoms.push_back(best);
        result.angles.push_back(grid.angles(best));

        // extend the orthonormal basis (modified Gram-Schmidt, two passes)
        VectorXcd q = grid.partial_atoms.col(best);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis)
                q -= b * (b.adjoint() * q)(0);
        const double norm = q.norm();
        if (norm > 1e-12 * std::sqrt(atom_norm2))
            basis.push_back(q / norm);
    }
    return result;
}

std::complex<double> estimate_beta(const VectorXcd& partial_snapshot, double theta_hor,
                                   double theta_ver, const SensingLayout& layout) {
    if (partial_snapshot.size() != layout.count())
        throw config_error("estimate_beta: snapshot does not match the layout");
    const VectorXcd atom = upa_response(theta_hor, theta_ver, layout.n_hor, layout.n_ver);
    std::complex<double> acc = 0.0;
    for (int i = 0; i < layout.count(); ++i)
        acc += std::conj(atom[layout.indices[static_cast<size_t>(i)]]) * partial_snapshot[i];
    return acc / static_cast<double>(layout.count());
}

VectorXcd reconstruct(std::span<const std::pair<double, double>> angles,
                      std::span<const std::complex<double>> betas, int n_hor, int n_ver) {
    if (angles.size() != betas.size())
        throw config_error("reconstruct: one gain per path required");
    VectorXcd y = VectorXcd::Zero(static_cast<Eigen::Index>(n_hor) * n_ver);
    for (size_t l = 0; l < angles.size(); ++l)
        y += betas[l] * upa_response(angles[l].first, angles[l].second, n_hor, n_ver);
    return y;
}

RecoveredObservation recover_source(std::span<const VectorXcd> snapshots, const AngleGrid& grid,
                                    int num_paths, const RecoveryOptions& opts) {
    const MatrixXcd r = sample_autocorrelation(snapshots);
    RecoveredObservation rec;
    rec.omp = omp_angles(r, grid, num_paths);

    const auto& layout = grid.layout;
    const Eigen::Index t_count = static_cast<Eigen::Index>(snapshots.size());
    const Eigen::Index l_count = static_cast<Eigen::Index>(rec.omp.angles.size());
    rec.y_hat = MatrixXcd::Zero(layout.aperture(), t_count);
    rec.betas = MatrixXcd::Zero(l_count, t_count);
    rec.residual_energy = VectorXd::Zero(t_count);

    MatrixXcd selected(layout.count(), l_count);
    for (Eigen::Index l = 0; l < l_count; ++l)
        selected.col(l) = grid.partial_atoms.col(rec.omp.atoms[static_cast<size_t>(l)]);
    Eigen::ColPivHouseholderQR<MatrixXcd> qr;
    if (opts.joint_refit && l_count > 0)
        qr.compute(selected);

    std::vector<std::complex<double>> betas(static_cast<size_t>(l_count));
    for (Eigen::Index t = 0; t < t_count; ++t) {
        const VectorXcd& y = snapshots[static_cast<size_t>(t)];
        if (opts.joint_refit && l_count > 0) {
            const VectorXcd b = qr.solve(y);
            for (Eigen::Index l = 0; l < l_count; ++l)
                betas[static_cast<size_t>(l)] = b[l];
        } else {
            for (Eigen::Index l = 0; l < l_count; ++l) {
                const auto& ang = rec.omp.angles[static_cast<size_t>(l)];
                betas[static_cast<size_t>(l)] = estimate_beta(y, ang.first, ang.second, layout);
            }
        }
        for (Eigen::Index l = 0; l < l_count; ++l)
            rec.betas(l, t) = betas[static_cast<size_t>(l)];
        rec.y_hat.col(t) = reconstruct(rec.omp.angles, betas, layout.n_hor, layout.n_ver);

        double resid = 0.0;
        for (int i = 0; i < layout.count(); ++i)
            resid += std::norm(rec.y_hat(layout.indices[static_cast<size_t>(i)], t) - y[i]);
        rec.residual_energy[t] = resid;
    }
    return rec;
}

RecoveredScene recover_all(std::span<const VectorXcd> bs_snapshots,
                           std::span<const std::vector<VectorXcd>> ue_snapshots,
                           const AngleGrid& grid, int bs_paths, int ue_paths,
                           const RecoveryOptions& opts) {
    RecoveredScene scene;
    scene.bs = recover_source(bs_snapshots, grid, bs_paths, opts);
    for (const auto& snaps : ue_snapshots) {
        if (snaps.size() != bs_snapshots.size())
            throw config_error("recover_all: snapshot windows must have equal length");
        scene.ue.push_back(recover_source(snaps, grid, ue_paths, opts));
    }
    return scene;
}

} // namespace arisim
