#include <doctest.h>

#include <array>
#include <vector>

#include "dwmoe/json_io.hpp"
#include "dwmoe/partition.hpp"
#include "dwmoe/rng.hpp"

using namespace dwmoe;

TEST_SUITE("partition") {

TEST_CASE("empty partition maps everything to region 0") {
    const Partition p;
    CHECK(p.region_count() == 1);
    CHECK(p.region_of(std::vector<double>{1.0, -2.0, 3.0}) == 0);
}

TEST_CASE("region bits follow the axis rule") {
    const Partition p({Axis{0, 0.0}, Axis{1, 0.0}});
    CHECK(p.region_count() == 4);
    CHECK(p.region_of(std::vector<double>{0.01, -0.02}) == 1);  // bit0 set, bit1 clear
    CHECK(p.region_of(std::vector<double>{-0.01, 0.02}) == 2);
    CHECK(p.region_of(std::vector<double>{0.01, 0.02}) == 3);
    CHECK(p.region_of(std::vector<double>{-0.01, -0.02}) == 0);
    // Boundary values belong to the upper region.
    CHECK(p.region_of(std::vector<double>{0.0, 0.0}) == 3);
}

TEST_CASE("an exhaustive grid covers all four regions disjointly") {
    const Partition p({Axis{0, 0.0}, Axis{1, 0.0}});
    std::array<std::size_t, 4> counts{};
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
            const std::vector<double> x = {-1.0 + 0.02 * i, -1.0 + 0.02 * j};
            const std::size_t r = p.region_of(x);
            REQUIRE(r < 4);
            ++counts[r];
        }
    std::size_t total = 0;
    for (std::size_t c : counts) {
        CHECK(c > 0);
        total += c;
    }
    CHECK(total == 101u * 101u);
}

TEST_CASE("from_medians uses the median per feature") {
    const std::vector<std::vector<double>> odd = {{-1.0}, {0.0}, {1.0}};
    CHECK(from_medians(odd, {0}).axes()[0].threshold == doctest::Approx(0.0));

    const std::vector<std::vector<double>> even = {{1.0}, {3.0}};
    CHECK(from_medians(even, {0}).axes()[0].threshold == doctest::Approx(2.0));

    // Symmetric data about zero on both features.
    std::vector<std::vector<double>> sym;
    for (int i = 1; i <= 20; ++i) {
        sym.push_back({0.1 * i, -0.3 * i});
        sym.push_back({-0.1 * i, 0.3 * i});
    }
    const Partition p = from_medians(sym, {0, 1});
    CHECK(p.axes()[0].threshold == doctest::Approx(0.0));
    CHECK(p.axes()[1].threshold == doctest::Approx(0.0));
    CHECK_THROWS_AS(from_medians(std::vector<std::vector<double>>{}, {0}), std::invalid_argument);
}

TEST_CASE("zero_line builds threshold-zero partitions") {
    const Partition p = zero_line({3, 5});
    CHECK(p.region_count() == 4);
    CHECK(p.axes()[0] == Axis{3, 0.0});
    CHECK(p.axes()[1] == Axis{5, 0.0});
    std::vector<double> x(6, -1.0);
    x[3] = 0.5;
    x[5] = 0.5;
    CHECK(p.region_of(x) == 3);

    CHECK(zero_line({}).region_count() == 1);
    CHECK_THROWS_AS(zero_line({2, 2}), std::invalid_argument);
    CHECK_THROWS_AS(zero_line({0, 1, 2}), std::invalid_argument);
}

TEST_CASE("region_of ignores features not named in the axes") {
    const Partition p = zero_line({1, 3});
    Xoshiro256pp rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(6);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        auto y = x;
        y[0] = rng.uniform(-9.0, 9.0);
        y[2] = rng.uniform(-9.0, 9.0);
        y[4] = rng.uniform(-9.0, 9.0);
        y[5] = rng.uniform(-9.0, 9.0);
        CHECK(p.region_of(x) == p.region_of(y));
    }
}

TEST_CASE("region_of validates feature indices") {
    const Partition p = zero_line({0, 5});
    CHECK_THROWS_AS(p.region_of(std::vector<double>{1.0, 2.0}), std::out_of_range);
}

TEST_CASE("partition JSON round-trip") {
    const Partition p({Axis{2, 0.125}, Axis{4, -3.5}});
    CHECK(partition_from_json(json::parse(to_json(p).dump())) == p);
}

}  // TEST_SUITE
