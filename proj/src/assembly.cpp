#include "pat/assembly.hpp"

#include "pat/errors.hpp"

#include <Eigen/SparseCore>

#include <cmath>
#include <string>
#include <vector>

namespace pat {

Material Material::uniform(std::size_t num_nodes, double speed) {
    Material m;
    m.c = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(num_nodes), speed);
    return m;
}

void Material::validate(std::size_t num_nodes) const {
    if (static_cast<std::size_t>(c.size()) != num_nodes) {
        throw InputError("material: speed field has " + std::to_string(c.size()) + " entries, mesh has " +
                         std::to_string(num_nodes) + " nodes");
    }
    if (!(c.array() > 0.0).all() || !c.allFinite()) throw InputError("material: wave speed must be positive");
    if (!(rho > 0.0 && rho_b > 0.0 && c_b > 0.0 && rho_p > 0.0 && c_p > 0.0)) {
        throw InputError("material: densities and speeds must be positive");
    }
    if (!(kappa >= 0.0)) throw InputError("material: kappa must be non-negative");
}

double SemidiscreteSystem::stability_limit() const { return 2.0 / std::sqrt(max_eigenvalue); }

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Power iteration for the largest eigenvalue of diag(m)^{-1} A, done in the
// symmetric form diag(m)^{-1/2} A diag(m)^{-1/2}.
double largest_generalized_eigenvalue(const SparseMatrix& a, const Eigen::VectorXd& m) {
    const Eigen::VectorXd inv_sqrt = m.cwiseSqrt().cwiseInverse();
    Eigen::VectorXd x(a.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = (i % 2 == 0 ? 1.0 : -1.0) + 1e-3 * static_cast<double>(i % 7);
    x.normalize();
    // Stop on the eigen-residual, not on the Rayleigh quotient stalling:
    // symmetric meshes have near-degenerate top modes.
    double lambda = 0.0;
    for (int it = 0; it < 20000; ++it) {
        Eigen::VectorXd y = inv_sqrt.cwiseProduct(a * inv_sqrt.cwiseProduct(x));
        lambda = x.dot(y);
        const double ny = y.norm();
        if (ny == 0.0) return 0.0;
        const double residual = (y - lambda * x).norm();
        x = y / ny;
        if (residual <= 1e-7 * std::abs(lambda)) break;
    }
    return lambda;
}

}  // namespace

SemidiscreteSystem assemble(std::shared_ptr<const Mesh> mesh_ptr, Material material) {
    if (!mesh_ptr) throw InputError("assemble: null mesh");
    const Mesh& mesh = *mesh_ptr;
    const std::size_t n = mesh.num_nodes();
    const std::size_t nb = mesh.num_boundary_nodes();
    material.validate(n);

    const double h = mesh.max_edge_length();
    const Eigen::VectorXd inv_c2 = material.c.array().square().inverse();

    Triplets mass, stiff;
    mass.reserve(9 * mesh.num_triangles());
    stiff.reserve(9 * mesh.num_triangles());
    const auto& nodes = mesh.nodes();
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles()[t];
        const double area = mesh.signed_area(t);
        if (area < 1e-14 * h * h) {
            throw AssemblyError("assemble: triangle " + std::to_string(t) + " is degenerate (area " +
                                std::to_string(area) + ")");
        }
        // Gradients of the barycentric coordinates: grad(lambda_i) = (y_j - y_k, x_k - x_j) / (2A).
        double gx[3], gy[3];
        for (int i = 0; i < 3; ++i) {
            const Point& pj = nodes[tri[(i + 1) % 3]];
            const Point& pk = nodes[tri[(i + 2) % 3]];
            gx[i] = (pj.y - pk.y) / (2.0 * area);
            gy[i] = (pk.x - pj.x) / (2.0 * area);
        }
        // c^-2 interpolated linearly; int(l_i l_j l_k) = 2A a!b!c!/(a+b+c+2)!.
        double w[3];
        for (int i = 0; i < 3; ++i) w[i] = inv_c2[static_cast<Eigen::Index>(tri[i])];
        const double wsum = w[0] + w[1] + w[2];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const auto ri = static_cast<int>(tri[i]);
                const auto cj = static_cast<int>(tri[j]);
                stiff.emplace_back(ri, cj, area * (gx[i] * gx[j] + gy[i] * gy[j]));
                const double m = (i == j) ? area * (wsum + 2.0 * w[i]) / 30.0
                                          : area * (wsum + w[i] + w[j]) / 60.0;
                mass.emplace_back(ri, cj, m);
            }
        }
    }

    SemidiscreteSystem sys;
    sys.mesh = std::move(mesh_ptr);
    sys.material = material;
    const auto ni = static_cast<Eigen::Index>(n);
    const auto nbi = static_cast<Eigen::Index>(nb);
    sys.M.resize(ni, ni);
    sys.M.setFromTriplets(mass.begin(), mass.end());
    sys.K.resize(ni, ni);
    sys.K.setFromTriplets(stiff.begin(), stiff.end());

    // Boundary curve operators in boundary-loop numbering.
    Triplets bmass, bstiff;
    const auto& len = mesh.boundary_edge_lengths();
    for (std::size_t e = 0; e < nb; ++e) {
        const auto a = static_cast<int>(e);
        const auto b = static_cast<int>((e + 1) % nb);
        const double l = len[e];
        bmass.emplace_back(a, a, l / 3.0);
        bmass.emplace_back(b, b, l / 3.0);
        bmass.emplace_back(a, b, l / 6.0);
        bmass.emplace_back(b, a, l / 6.0);
        bstiff.emplace_back(a, a, 1.0 / l);
        bstiff.emplace_back(b, b, 1.0 / l);
        bstiff.emplace_back(a, b, -1.0 / l);
        bstiff.emplace_back(b, a, -1.0 / l);
    }
    sys.Mb.resize(nbi, nbi);
    sys.Mb.setFromTriplets(bmass.begin(), bmass.end());
    sys.Kb.resize(nbi, nbi);
    sys.Kb.setFromTriplets(bstiff.begin(), bstiff.end());
    sys.mb_lumped = sys.Mb * Eigen::VectorXd::Ones(nbi);

    // Impedance boundary terms lifted to node numbering.
    const double damping = material.rho / (material.rho_b * material.c_b);
    const double curvature_scale = material.rho / material.rho_b;
    const auto& loop = mesh.boundary_loop();
    const auto& curvature = mesh.boundary_curvature();
    Triplets damp, curv;
    for (int k = 0; k < sys.Mb.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(sys.Mb, k); it; ++it) {
            damp.emplace_back(static_cast<int>(loop[static_cast<std::size_t>(it.row())]),
                              static_cast<int>(loop[static_cast<std::size_t>(it.col())]), damping * it.value());
        }
    }
    for (std::size_t i = 0; i < nb; ++i) {
        const auto node = static_cast<int>(loop[i]);
        curv.emplace_back(node, node, curvature_scale * curvature[i] * sys.mb_lumped[static_cast<Eigen::Index>(i)]);
    }
    sys.C.resize(ni, ni);
    sys.C.setFromTriplets(damp.begin(), damp.end());
    sys.B.resize(ni, ni);
    sys.B.setFromTriplets(curv.begin(), curv.end());
    sys.stiffness = sys.K + sys.B;

    sys.m_lumped = sys.M * Eigen::VectorXd::Ones(ni);
    sys.c_lumped = sys.C * Eigen::VectorXd::Ones(ni);
    sys.max_eigenvalue = largest_generalized_eigenvalue(sys.stiffness, sys.m_lumped);
    return sys;
}

Eigen::VectorXd boundary_laplacian_apply(const SemidiscreteSystem& system, const Eigen::VectorXd& g) {
    if (g.size() != system.Kb.rows()) {
        throw DimensionError("boundary_laplacian_apply: got " + std::to_string(g.size()) + " values for " +
                             std::to_string(system.Kb.rows()) + " boundary nodes");
    }
    return -(system.Kb * g).cwiseQuotient(system.mb_lumped);
}

double cfl_time_step(const SemidiscreteSystem& system, double cfl) {
    return cfl * system.mesh->min_edge_length() / system.material.max_speed();
}

double mass_inner(const SemidiscreteSystem& system, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return (u.cwiseProduct(system.m_lumped)).dot(v);
}

double mass_norm(const SemidiscreteSystem& system, const Eigen::VectorXd& u) {
    return std::sqrt(std::max(0.0, mass_inner(system, u, u)));
}

}  // namespace pat
