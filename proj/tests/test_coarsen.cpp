#include <doctest.h>

#include <ecograph/coarsen.hpp>
#include <ecograph/numerics.hpp>
#include <ecograph/rng.hpp>

#include <cmath>

using namespace ecograph;

namespace {

WatershedGraph chain(int n, double area = 100.0) {
    WatershedGraph g;
    for (int i = 0; i < n; ++i) g.nodes.push_back({area, 10.0 * i, i % 3, 0});
    for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1, 1.0});
    return g;
}

/// Random rooted tree draining to node 0, random areas; plus a random map.
WatershedGraph random_tree(Rng& rng, int n) {
    WatershedGraph g;
    for (int i = 0; i < n; ++i)
        g.nodes.push_back({rng.uniform(50.0, 5000.0), rng.uniform(0.0, 800.0),
                           static_cast<int>(rng.below(4)), static_cast<int>(rng.below(3))});
    for (int i = 1; i < n; ++i)
        g.edges.push_back({i, static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(i))),
                           1.0});
    return g;
}

/// Contiguity-free random map with c clusters (kept consistent by renaming).
CoarseningMap random_map(Rng& rng, int n, int c) {
    CoarseningMap map;
    map.fine_to_coarse.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        map.fine_to_coarse[static_cast<std::size_t>(i)] =
            static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(c)));
    // compact ids so the coarse set is dense
    std::vector<int> rename(static_cast<std::size_t>(c), -1);
    int next = 0;
    for (auto& id : map.fine_to_coarse) {
        if (rename[static_cast<std::size_t>(id)] < 0) rename[static_cast<std::size_t>(id)] = next++;
        id = rename[static_cast<std::size_t>(id)];
    }
    return map;
}

}  // namespace

TEST_CASE("merged node area is the sum of member areas") {
    WatershedGraph g;
    g.nodes = {{100.0, 5.0, 0, 0}, {200.0, 8.0, 1, 1}};
    WatershedGraph coarse = coarsen(g, CoarseningMap::all_to_one(2));
    REQUIRE(coarse.node_count() == 1);
    CHECK(coarse.nodes[0].area == 300.0);
    // area-weighted mean elevation: (100*5 + 200*8)/300 = 7
    CHECK(coarse.nodes[0].elevation == doctest::Approx(7.0).epsilon(1e-15));
    // majority by area: class of the 200 m^2 node
    CHECK(coarse.nodes[0].soil_class == 1);
}

TEST_CASE("categorical majority ties break toward the smaller id") {
    WatershedGraph g;
    g.nodes = {{100.0, 0.0, 2, 0}, {100.0, 0.0, 1, 0}};
    WatershedGraph coarse = coarsen(g, CoarseningMap::all_to_one(2));
    CHECK(coarse.nodes[0].soil_class == 1);
}

TEST_CASE("crossing edge survives with renormalized weight") {
    WatershedGraph g = chain(3);
    CoarseningMap map;
    map.fine_to_coarse = {0, 0, 1};
    WatershedGraph coarse = coarsen(g, map);
    REQUIRE(coarse.node_count() == 2);
    REQUIRE(coarse.edges.size() == 1);
    CHECK(coarse.edges[0].from == 0);
    CHECK(coarse.edges[0].to == 1);
    CHECK(coarse.edges[0].weight == 1.0);
    CHECK(validate(coarse).ok());
}

TEST_CASE("full collapse yields a lumped graph") {
    WatershedGraph coarse = coarsen(chain(6), CoarseningMap::all_to_one(6));
    CHECK(coarse.node_count() == 1);
    CHECK(coarse.edges.empty());
    CHECK(coarse.kind() == GraphKind::Lumped);
}

TEST_CASE("identity map is a no-op, grid provenance included") {
    WatershedGraph g = chain(4);
    g.grid_meta = GridMeta{1, 4, 30.0, 0.0, 0.0, {0, 1, 2, 3}};
    WatershedGraph coarse = coarsen(g, CoarseningMap::identity(4));
    CHECK(coarse.kind() == GraphKind::DistributedGrid);
    CHECK(coarse.node_count() == 4);
    REQUIRE(coarse.edges.size() == g.edges.size());
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        CHECK(coarse.edges[i].from == g.edges[i].from);
        CHECK(coarse.edges[i].weight == g.edges[i].weight);
    }
    for (int i = 0; i < 4; ++i)
        CHECK(coarse.nodes[static_cast<std::size_t>(i)].area ==
              g.nodes[static_cast<std::size_t>(i)].area);
}

TEST_CASE("clustering across a confluence loop raises CycleDetected") {
    // a -> b -> c; clustering {a, c} vs {b} induces A <-> B
    WatershedGraph g = chain(3);
    CoarseningMap map;
    map.fine_to_coarse = {0, 1, 0};
    CHECK_THROWS_AS((void)coarsen(g, map), CycleDetected);
}

TEST_CASE("incomplete maps are rejected") {
    WatershedGraph g = chain(3);
    CoarseningMap short_map;
    short_map.fine_to_coarse = {0, 0};
    CHECK_THROWS_AS((void)coarsen(g, short_map), IncompleteMap);
    CoarseningMap gap;
    gap.fine_to_coarse = {0, 2, 2};  // coarse id 1 has no members
    CHECK_THROWS_AS((void)coarsen(g, gap), IncompleteMap);
}

TEST_CASE("area conservation over random graphs and maps") {
    Rng rng(2027);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 3 + static_cast<int>(rng.below(60));
        WatershedGraph g = random_tree(rng, n);
        CoarseningMap map = random_map(rng, n, 1 + static_cast<int>(rng.below(5)));
        WatershedGraph coarse;
        try {
            coarse = coarsen(g, map);
        } catch (const CycleDetected&) {
            continue;  // random clustering may fold the tree into a cycle
        }
        KahanSum fine, merged;
        for (const auto& node : g.nodes) fine.add(node.area);
        for (const auto& node : coarse.nodes) merged.add(node.area);
        CHECK(std::abs(merged.value() - fine.value()) <= 1e-9 * std::abs(fine.value()));
        CHECK(validate(coarse).ok());
    }
}

TEST_CASE("uncoarsen: replicate") {
    WatershedGraph g = chain(3);
    CoarseningMap map = CoarseningMap::all_to_one(3);
    auto fine = uncoarsen_values(g, map, {5.0}, UncoarsenMethod::Replicate);
    CHECK(fine == std::vector<double>{5.0, 5.0, 5.0});
}

TEST_CASE("uncoarsen: interpolate degenerates to replicate within one cluster") {
    WatershedGraph g = chain(3);
    CoarseningMap map = CoarseningMap::all_to_one(3);
    auto a = uncoarsen_values(g, map, {5.0}, UncoarsenMethod::Replicate);
    auto b = uncoarsen_values(g, map, {5.0}, UncoarsenMethod::Interpolate);
    CHECK(a == b);
}

TEST_CASE("uncoarsen: 50/50 blend with the sole unit-weight neighbor") {
    // fine node 0 in cluster A (value 2), its only neighbor in cluster B (value 4)
    WatershedGraph g;
    g.nodes = {{1.0, 0, 0, 0}, {1.0, 0, 0, 0}};
    g.edges = {{0, 1, 1.0}};
    CoarseningMap map;
    map.fine_to_coarse = {0, 1};
    auto fine = uncoarsen_values(g, map, {2.0, 4.0}, UncoarsenMethod::Interpolate);
    CHECK(fine[0] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("replicated cluster means preserve the area-weighted global mean") {
    Rng rng(555);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 4 + static_cast<int>(rng.below(40));
        WatershedGraph g = random_tree(rng, n);
        CoarseningMap map = random_map(rng, n, 1 + static_cast<int>(rng.below(4)));
        std::vector<double> field;
        for (int i = 0; i < n; ++i) field.push_back(rng.uniform(-5.0, 5.0));

        const int c = map.coarse_count();
        std::vector<KahanSum> value_sum(static_cast<std::size_t>(c));
        std::vector<KahanSum> area_sum(static_cast<std::size_t>(c));
        for (int i = 0; i < n; ++i) {
            auto cid = static_cast<std::size_t>(map.fine_to_coarse[static_cast<std::size_t>(i)]);
            value_sum[cid].add(g.nodes[static_cast<std::size_t>(i)].area *
                               field[static_cast<std::size_t>(i)]);
            area_sum[cid].add(g.nodes[static_cast<std::size_t>(i)].area);
        }
        std::vector<double> coarse_means;
        for (int k = 0; k < c; ++k)
            coarse_means.push_back(value_sum[static_cast<std::size_t>(k)].value() /
                                   area_sum[static_cast<std::size_t>(k)].value());

        auto fine = uncoarsen_values(g, map, coarse_means, UncoarsenMethod::Replicate);
        KahanSum before, after, area;
        for (int i = 0; i < n; ++i) {
            before.add(g.nodes[static_cast<std::size_t>(i)].area *
                       field[static_cast<std::size_t>(i)]);
            after.add(g.nodes[static_cast<std::size_t>(i)].area *
                      fine[static_cast<std::size_t>(i)]);
            area.add(g.nodes[static_cast<std::size_t>(i)].area);
        }
        double mean_before = before.value() / area.value();
        double mean_after = after.value() / area.value();
        CHECK(std::abs(mean_after - mean_before) <= 1e-12 * std::max(1.0, std::abs(mean_before)));
    }
}

TEST_CASE("uncoarsen input checks") {
    WatershedGraph g = chain(3);
    CoarseningMap map = CoarseningMap::all_to_one(3);
    CHECK_THROWS_AS((void)uncoarsen_values(g, map, {1.0, 2.0}, UncoarsenMethod::Replicate),
                    IncompleteMap);
    CHECK_THROWS_AS((void)parse_uncoarsen_method("nearest"), UnknownMethod);
    CHECK(parse_uncoarsen_method("Replicate") == UncoarsenMethod::Replicate);
    CHECK(parse_uncoarsen_method("interpolate") == UncoarsenMethod::Interpolate);
}

TEST_CASE("downstream-distance clustering is contiguous and complete") {
    Rng rng(31);
    WatershedGraph g = random_tree(rng, 40);
    CoarseningMap map = cluster_by_downstream_distance(g, 5);
    map.check_against(g);
    CHECK(map.coarse_count() == 5);
    WatershedGraph coarse = coarsen(g, map);
    CHECK(validate(coarse).ok());
}
