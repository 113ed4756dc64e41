#include "doctest.h"

#include "pat/assembly.hpp"
#include "pat/errors.hpp"
#include "pat/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <memory>
#include <numbers>

using namespace pat;

namespace {

SemidiscreteSystem disk_system(double h, double radius = 1.0) {
    auto mesh = std::make_shared<const Mesh>(generate_disk_mesh(radius, h));
    return assemble(mesh, Material::uniform(mesh->num_nodes()));
}

double asymmetry(const SparseMatrix& a) { return Eigen::MatrixXd(a - SparseMatrix(a.transpose())).cwiseAbs().maxCoeff(); }

// Arc-length coordinate of each boundary node.
Eigen::VectorXd arc_positions(const Mesh& m) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(m.num_boundary_nodes()));
    double acc = 0.0;
    for (std::size_t i = 0; i < m.num_boundary_nodes(); ++i) {
        s[static_cast<Eigen::Index>(i)] = acc;
        acc += m.boundary_edge_lengths()[i];
    }
    return s;
}

double laplacian_mode_error(double h, int mode) {
    const auto sys = disk_system(h);
    const double L = sys.mesh->perimeter();
    const double k = 2.0 * std::numbers::pi * mode / L;
    const Eigen::VectorXd g = (k * arc_positions(*sys.mesh)).array().sin();
    const Eigen::VectorXd lap = boundary_laplacian_apply(sys, g);
    return (lap + k * k * g).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("assembly") {

TEST_CASE("symmetry and null spaces") {
    const auto sys = disk_system(0.2);
    for (const SparseMatrix* a : {&sys.M, &sys.K, &sys.C, &sys.B, &sys.Mb, &sys.Kb}) CHECK(asymmetry(*a) == 0.0);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(sys.num_nodes()));
    const Eigen::VectorXd bones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(sys.num_boundary()));
    CHECK((sys.K * ones).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((sys.Kb * bones).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(boundary_laplacian_apply(sys, bones).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(sys.m_lumped.minCoeff() > 0.0);
}

TEST_CASE("stiffness energy of a linear function equals area times gradient squared") {
    const auto sys = disk_system(0.1);
    Eigen::VectorXd x(static_cast<Eigen::Index>(sys.num_nodes()));
    for (std::size_t i = 0; i < sys.num_nodes(); ++i) x[static_cast<Eigen::Index>(i)] = 3.0 * sys.mesh->nodes()[i].x;
    const double nb = static_cast<double>(sys.num_boundary());
    const double area = 0.5 * nb * std::sin(2.0 * std::numbers::pi / nb);
    CHECK(x.dot(sys.K * x) == doctest::Approx(9.0 * area).epsilon(1e-12));
}

TEST_CASE("mass integrates c^-2") {
    auto mesh = std::make_shared<const Mesh>(generate_disk_mesh(1.0, 0.1));
    const double nb = static_cast<double>(mesh->num_boundary_nodes());
    const double polygon_area = 0.5 * nb * std::sin(2.0 * std::numbers::pi / nb);

    SUBCASE("uniform speed") {
        const auto sys = assemble(mesh, Material::uniform(mesh->num_nodes()));
        CHECK(sys.M.sum() == doctest::Approx(polygon_area).epsilon(1e-12));
        CHECK(sys.m_lumped.sum() == doctest::Approx(polygon_area).epsilon(1e-12));
    }
    SUBCASE("c^-2 = 2 + x integrates exactly") {
        Material mat = Material::uniform(mesh->num_nodes());
        for (std::size_t i = 0; i < mesh->num_nodes(); ++i) {
            mat.c[static_cast<Eigen::Index>(i)] = 1.0 / std::sqrt(2.0 + mesh->nodes()[i].x);
        }
        const auto sys = assemble(mesh, mat);
        CHECK(sys.M.sum() == doctest::Approx(2.0 * polygon_area).epsilon(1e-12));
    }
}

TEST_CASE("total mass converges to pi at second order") {
    const double e1 = std::abs(disk_system(0.1).M.sum() - std::numbers::pi);
    const double e2 = std::abs(disk_system(0.05).M.sum() - std::numbers::pi);
    CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("impedance terms scale with the material constants") {
    const auto sys = disk_system(0.1, 2.0);
    const double perimeter = sys.mesh->perimeter();
    // rho / (rho_b c_b) = 1/2 and rho / rho_b * H = 1/2 * 1/2.
    CHECK(sys.C.sum() == doctest::Approx(0.5 * perimeter).epsilon(1e-12));
    CHECK(sys.c_lumped.sum() == doctest::Approx(0.5 * perimeter).epsilon(1e-12));
    CHECK(sys.B.sum() == doctest::Approx(0.25 * perimeter).epsilon(1e-9));
    CHECK(sys.Mb.sum() == doctest::Approx(perimeter).epsilon(1e-12));
}

TEST_CASE("boundary laplacian of a Fourier mode") {
    SUBCASE("second-order convergence") {
        const double e1 = laplacian_mode_error(0.1, 3);
        const double e2 = laplacian_mode_error(0.05, 3);
        CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
    }
    SUBCASE("eigenvalue ratio between modes m and 2m") {
        const auto sys = disk_system(1.0 / 32.0);
        const Eigen::VectorXd s = arc_positions(*sys.mesh);
        const double L = sys.mesh->perimeter();
        auto eigenvalue = [&](int m) {
            const Eigen::VectorXd g = (2.0 * std::numbers::pi * m / L * s).array().sin();
            const Eigen::VectorXd lap = boundary_laplacian_apply(sys, g);
            return lap.dot(g) / g.dot(g);
        };
        CHECK(eigenvalue(2) / eigenvalue(4) == doctest::Approx(0.25).epsilon(2e-3));
    }
    CHECK_THROWS_AS(boundary_laplacian_apply(disk_system(0.5), Eigen::VectorXd::Ones(3)), DimensionError);
}

TEST_CASE("power-iteration eigenvalue matches a dense solve") {
    const auto sys = disk_system(0.25);
    const Eigen::MatrixXd a = Eigen::MatrixXd(sys.stiffness);
    const Eigen::VectorXd s = sys.m_lumped.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd sym = s.asDiagonal() * a * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    CHECK(sys.max_eigenvalue == doctest::Approx(eig.eigenvalues().maxCoeff()).epsilon(1e-6));
    CHECK(sys.stability_limit() == doctest::Approx(2.0 / std::sqrt(eig.eigenvalues().maxCoeff())).epsilon(1e-6));
    CHECK(cfl_time_step(sys, 0.5) == doctest::Approx(0.5 * sys.mesh->min_edge_length()));
}

TEST_CASE("degenerate triangle and invalid material") {
    auto sliver = std::make_shared<const Mesh>(std::vector<Point>{{0, 0}, {1, 0}, {0.5, 1e-15}},
                                               std::vector<Triangle>{{0, 1, 2}}, std::vector<std::size_t>{0, 1, 2});
    CHECK_THROWS_AS(assemble(sliver, Material::uniform(3)), AssemblyError);

    auto mesh = std::make_shared<const Mesh>(generate_disk_mesh(1.0, 0.5));
    Material bad = Material::uniform(mesh->num_nodes());
    bad.kappa = -0.1;
    CHECK_THROWS_AS(assemble(mesh, bad), InputError);
    bad = Material::uniform(mesh->num_nodes(), -1.0);
    CHECK_THROWS_AS(assemble(mesh, bad), InputError);
    CHECK_THROWS_AS(assemble(mesh, Material::uniform(3)), InputError);
}

}  // TEST_SUITE
