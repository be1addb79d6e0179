#include <doctest.h>

#include <stdexcept>

#include "sdde/core.hpp"

using namespace sdde;

TEST_SUITE("core") {

TEST_CASE("mesh nodes")
{
    const DelayMesh mesh(1.0, 3, 4);
    CHECK(mesh.h() == 0.25);
    CHECK(mesh_node(mesh, 2, 3) == 2.75);
    CHECK(mesh_node(mesh, 0, 0) == 0.0);
    CHECK(mesh_node(DelayMesh(0.5, 1, 2), 1, 2) == 1.0);
    CHECK(mesh.horizon() == 4.0);
}

TEST_CASE("segment end coincides with next segment start for any N")
{
    for (int N : {1, 3, 7, 10, 49, 100, 1024}) {
        for (double tau : {1.0, 0.3, 0.7, 2.5}) {
            const DelayMesh mesh(tau, 5, N);
            for (int j = 0; j < 5; ++j)
                CHECK(mesh.node(j, N) == mesh.node(j + 1, 0));
        }
    }
}

TEST_CASE("mesh rejects out-of-range indices and bad shapes")
{
    const DelayMesh mesh(1.0, 2, 4);
    CHECK_THROWS_AS(mesh.node(3, 0), std::out_of_range);
    CHECK_THROWS_AS(mesh.node(0, 5), std::out_of_range);
    CHECK_THROWS_AS(mesh.node(-1, 0), std::out_of_range);
    CHECK_THROWS_AS(DelayMesh(0.0, 1, 4), std::invalid_argument);
    CHECK_THROWS_AS(DelayMesh(1.0, -1, 4), std::invalid_argument);
    CHECK_THROWS_AS(DelayMesh(1.0, 1, 0), std::invalid_argument);
}

TEST_CASE("randomized time")
{
    const DelayMesh mesh(1.0, 3, 4);
    CHECK(randomized_time(mesh, 1, 2, 0.0) == mesh.node(1, 2));
    CHECK(randomized_time(mesh, 1, 2, 1.0) == mesh.node(1, 3));
    CHECK(randomized_time(mesh, 2, 3, 1.0) == mesh.node(3, 0));
    CHECK(randomized_time(mesh, 0, 0, 0.5) == 0.125);
    CHECK_THROWS_AS(randomized_time(mesh, 0, 0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(randomized_time(mesh, 0, 0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(randomized_time(mesh, 0, 4, 0.5), std::out_of_range);
}

TEST_CASE("delayed value reads the history on the first segment")
{
    const DelayMesh mesh(1.0, 2, 4);
    SegmentedPath path(mesh, {1.5, -2.0});
    for (int j = 0; j <= 2; ++j)
        for (int k = 0; k <= 4; ++k) {
            auto v = path.at(j, k);
            v[0] = 10 * j + k;
            v[1] = -(10 * j + k);
        }
    for (int k = 0; k <= 4; ++k) {
        const auto z = delayed_value(path, 0, k);
        CHECK(z[0] == 1.5);
        CHECK(z[1] == -2.0);
    }
    const auto z = delayed_value(path, 1, 2);
    CHECK(z[0] == 2.0);
    CHECK(z[1] == -2.0);
    CHECK(delayed_value(path, 2, 4)[0] == 14.0);
    CHECK_THROWS_AS(delayed_value(path, 3, 0), std::out_of_range);
}

TEST_CASE("segment view covers one lag interval")
{
    const DelayMesh mesh(1.0, 1, 3);
    SegmentedPath path(mesh, {0.0});
    path.at(1, 0)[0] = 7.0;
    path.at(1, 3)[0] = 9.0;
    const auto seg = path.segment(1);
    REQUIRE(seg.size() == 4);
    CHECK(seg.front() == 7.0);
    CHECK(seg.back() == 9.0);
}

TEST_CASE("predicted exponent")
{
    SddeProblem p;
    p.alpha1 = 0.5;
    p.alpha2 = 1.0;
    p.rho = 1.0;
    CHECK(p.predicted_exponent(0) == doctest::Approx(0.5));
    CHECK(p.predicted_exponent(2) == doctest::Approx(0.125));
    p.rho = 0.1;
    CHECK(p.predicted_exponent(1) == doctest::Approx(0.05));
}

}
