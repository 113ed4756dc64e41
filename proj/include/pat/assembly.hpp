#pragma once

#include "pat/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>

namespace pat {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Acoustic medium plus sensor constants. Defaults are the nondimensional
/// PVDF-on-backing values (c = rho = 1, rho_p = 1.5, c_p = 1, rho_b = 2,
/// c_b = 1, kappa = 0.9).
struct Material {
    Eigen::VectorXd c;  ///< wave speed per node
    double rho = 1.0;
    double rho_b = 2.0;
    double c_b = 1.0;
    double rho_p = 1.5;
    double c_p = 1.0;
    double kappa = 0.9;

    static Material uniform(std::size_t num_nodes, double speed = 1.0);
    /// Throws InputError unless speeds/densities are positive and kappa >= 0.
    void validate(std::size_t num_nodes) const;
    double max_speed() const { return c.maxCoeff(); }
};

/**
 * Finite-element matrices of M p'' + C p' + (K + B) p = 0 on a mesh.
 *
 * Node-indexed (N x N): M, K, C, B, plus the lumped diagonals of M and C.
 * Boundary-indexed (Nb x Nb, in boundary-loop order): Mb and Kb, plus the
 * lumped diagonal of Mb. The lumped diagonals are what the explicit scheme
 * and all discrete inner products use.
 */
struct SemidiscreteSystem {
    std::shared_ptr<const Mesh> mesh;
    Material material;

    SparseMatrix M;
    SparseMatrix K;
    SparseMatrix C;
    SparseMatrix B;
    SparseMatrix stiffness;  ///< K + B
    Eigen::VectorXd m_lumped;
    Eigen::VectorXd c_lumped;

    SparseMatrix Mb;
    SparseMatrix Kb;
    Eigen::VectorXd mb_lumped;

    /// Largest eigenvalue of m_lumped^{-1} (K + B), estimated by power iteration.
    double max_eigenvalue = 0.0;

    std::size_t num_nodes() const noexcept { return mesh->num_nodes(); }
    std::size_t num_boundary() const noexcept { return mesh->num_boundary_nodes(); }

    /// Largest explicit step the central-difference scheme tolerates.
    double stability_limit() const;
};

SemidiscreteSystem assemble(std::shared_ptr<const Mesh> mesh, Material material);

/// Discrete periodic second arc-length derivative, -Mb_lumped^{-1} Kb g.
Eigen::VectorXd boundary_laplacian_apply(const SemidiscreteSystem& system, const Eigen::VectorXd& g);

/// dt = cfl * h_min / c_max.
double cfl_time_step(const SemidiscreteSystem& system, double cfl = 0.5);

/// sqrt(u^T M_lumped v) style helpers for the c^-2 weighted inner product.
double mass_inner(const SemidiscreteSystem& system, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
double mass_norm(const SemidiscreteSystem& system, const Eigen::VectorXd& u);

}  // namespace pat
